use emberfield::charring::{CharParams, CharState};
use emberfield::fire::{FireState, SimParams};
use emberfield::grid::{GridSpec, Vec3};
use emberfield::io::{read_camera, read_gbuffer};
use emberfield::material::{MaterialTable, SolidProps};
use emberfield::occupancy::{build_occupancy, OccupancyGrid};
use emberfield::render::{render_frame, render_layers, Camera, FireColor, FrameInputs, FrameLayers, GBuffer, RenderParams};
use emberfield::scene::{demo_scene, write_demo, RunConfig};
use emberfield::spectral::{blackbody_xyz, linear_to_display, LinearRgb, SpectralTable};
use nalgebra::Vector3;
use proptest::prelude::*;

struct Bench {
    fire: FireState,
    char_state: CharState,
    solids: SolidProps,
    sim: SimParams,
}

impl Bench {
    fn new(spec: GridSpec) -> Self {
        Self {
            fire: FireState::new(spec),
            char_state: CharState::new(spec, &CharParams::default()),
            solids: SolidProps::new(OccupancyGrid::empty(spec), &MaterialTable::new(), &CharParams::default()),
            sim: SimParams::default(),
        }
    }

    fn layers(&self, camera: &Camera, g: &GBuffer, params: &RenderParams) -> FrameLayers {
        let inputs =
            FrameInputs { fire: &self.fire, char_state: &self.char_state, solids: &self.solids, sim: &self.sim };
        render_layers(camera, g, &inputs, params).unwrap().0
    }
}

fn slab_params() -> RenderParams {
    RenderParams { n_coarse: 128, n_fine: 896, ..RenderParams::default() }
}

/// One-pixel camera looking along +x from 0.1 outside a uniformly burning
/// grid, with the background at `0.1 + d`.
fn slab(y0: f32, d: f64, params: &RenderParams) -> (FrameLayers, LinearRgb) {
    let spec = GridSpec::new([40, 6, 6], Vec3::zeros(), 0.01).unwrap();
    let mut bench = Bench::new(spec);
    bench.fire.y.values_mut().fill(y0);
    let eye = Vector3::new(-0.1, 0.03, 0.03);
    let camera = Camera::look_at(1, 1, [1.0, 1.0, 0.5, 0.5], eye, eye + Vector3::x(), Vector3::z()).unwrap();
    let g = GBuffer::new(1, 1, vec![LinearRgb::zeros()], vec![(0.1 + d) as f32], vec![-Vector3::x()]).unwrap();
    let layers = bench.layers(&camera, &g, params);
    let table = SpectralTable::default();
    let t = bench.sim.temperature(y0) as f64;
    let color = FireColor::new(t.max(1000.0), params.fire_brightness, &table);
    (layers, color.to_rgb(&blackbody_xyz(t, &table)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn slab_matches_closed_form(y0 in 0.3f32..0.95, d in 0.002f64..0.3, sigma in 5.0f64..80.0) {
        let params = RenderParams { sigma_a: sigma, ..slab_params() };
        let (layers, emitted) = slab(y0, d, &params);
        let d = (0.1 + d) as f32 as f64 - 0.1;
        let tau = (-sigma * d).exp();
        // marching stops once the ray is opaque
        let opaque = 2e-6;
        prop_assert!((layers.transmittance[0] - tau).abs() <= 0.005 * tau + opaque);
        for c in 0..3 {
            let want = emitted[c] * (1.0 - tau);
            prop_assert!((layers.fire[0][c] - want).abs() <= 0.005 * want.abs() + opaque * emitted[c].abs());
        }
    }

    #[test]
    fn empty_medium_composites_to_the_gbuffer(
        colors in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0), 12),
        exposure in 0.2f64..3.0,
    ) {
        let spec = GridSpec::new([8, 8, 8], Vec3::zeros(), 0.05).unwrap();
        let bench = Bench::new(spec);
        let camera = Camera::look_at(4, 3, [4.0, 4.0, 2.0, 1.5], Vector3::new(0.2, -1.0, 0.2), Vector3::new(0.2, 0.2, 0.2), Vector3::z()).unwrap();
        let color: Vec<LinearRgb> = colors.iter().map(|&(r, g, b)| LinearRgb::new(r, g, b)).collect();
        let g = GBuffer::new(4, 3, color.clone(), vec![0.8; 12], vec![-Vector3::y(); 12]).unwrap();
        let params = RenderParams { exposure, ..RenderParams::default() };
        let inputs = FrameInputs { fire: &bench.fire, char_state: &bench.char_state, solids: &bench.solids, sim: &bench.sim };
        let img = render_frame(&camera, &g, &inputs, &params).unwrap();
        for (p, c) in color.iter().enumerate() {
            prop_assert_eq!(img.pixel(p % 4, p / 4), linear_to_display(c, exposure).to_u8());
        }
    }
}

#[test]
fn thick_slab_saturates() {
    let params = slab_params();
    let (thin, _) = slab(0.5, 0.15, &params);
    let (thick, emitted) = slab(0.5, 0.3, &params);
    for c in 0..3 {
        assert!((thick.fire[0][c] - thin.fire[0][c]).abs() < 0.01 * thin.fire[0][c]);
        assert!((thick.fire[0][c] - emitted[c]).abs() < 0.01 * emitted[c]);
    }
    assert!(thick.transmittance[0] < 1e-5);
}

#[test]
fn background_in_front_of_the_fire_hides_it() {
    let params = slab_params();
    // the wall sits before the grid starts
    let (layers, _) = slab(0.5, -0.05, &params);
    assert_eq!(layers.transmittance[0], 1.0);
    assert_eq!(layers.fire[0], LinearRgb::zeros());
}

#[test]
fn fire_column_dims_the_wall_behind_it() {
    // camera looks along +y at a wall; a burning column stands in the left half
    let spec = GridSpec::new([20, 20, 20], Vec3::zeros(), 0.01).unwrap();
    let mut bench = Bench::new(spec);
    for k in 0..20 {
        for j in 8..12 {
            for i in 2..8 {
                bench.fire.y.set(i, j, k, 0.5);
            }
        }
    }
    let (w, h) = (16, 8);
    let eye = Vector3::new(0.1, -0.3, 0.1);
    let camera =
        Camera::look_at(w, h, [30.0, 30.0, w as f64 / 2.0, h as f64 / 2.0], eye, Vector3::new(0.1, 0.0, 0.1), Vector3::z())
            .unwrap();
    // flat gray wall at y = 0.19 behind the column
    let mut depth = Vec::new();
    for p in 0..w * h {
        let ray = camera.generate_ray(p % w, p / w);
        depth.push(((0.19 - ray.origin.y) / ray.dir.y) as f32);
    }
    let color = vec![LinearRgb::new(0.4, 0.4, 0.4); w * h];
    let g = GBuffer::new(w, h, color, depth, vec![-Vector3::y(); w * h]).unwrap();
    let params = RenderParams { t_light: 1e9, ..RenderParams::default() };
    let layers = bench.layers(&camera, &g, &params);
    let row = h / 2;
    let behind = (0..w).find(|&i| {
        let x = camera.generate_ray(i, row).at(0.4).x;
        (0.03..0.07).contains(&x)
    });
    let clear = (0..w).rev().find(|&i| camera.generate_ray(i, row).at(0.4).x > 0.12);
    let (behind, clear) = (behind.unwrap() + row * w, clear.unwrap() + row * w);
    assert!(layers.transmittance[behind] < 1.0);
    assert_eq!(layers.transmittance[clear], 1.0);
    let dimmed = layers.background[behind] * layers.transmittance[behind];
    let open = layers.background[clear] * layers.transmittance[clear];
    assert!(dimmed.max() < open.max());
}

#[test]
fn demo_files_load_and_render() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_demo(dir.path(), 40, 30).unwrap();
    let cfg = RunConfig::load(&path, &[]).unwrap();
    let scene = demo_scene(40, 30);
    let occ = build_occupancy(&scene.points, cfg.grid, &scene.materials, cfg.opacity_threshold).unwrap();
    let solids = SolidProps::new(occ, &scene.materials, &cfg.char_params);
    let fire = FireState::new(cfg.grid);
    let char_state = CharState::new(cfg.grid, &cfg.char_params);
    let inputs = FrameInputs { fire: &fire, char_state: &char_state, solids: &solids, sim: &cfg.sim };
    for cam in &cfg.cameras {
        let camera = read_camera(&cam.file).unwrap();
        let g = read_gbuffer(&cam.gbuffer).unwrap();
        let img = render_frame(&camera, &g, &inputs, &cfg.render).unwrap();
        assert_eq!((img.width, img.height), (40, 30));
    }
}
