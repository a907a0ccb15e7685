use emberfield::charring::{CharParams, CharState};
use emberfield::fire::FireState;
use emberfield::grid::{GridSpec, Vec3};
use emberfield::io::text::Document;
use emberfield::io::{
    decode_plane, decode_points, decode_ppm, decode_vgrid, encode_plane, encode_points, encode_ppm, encode_vgrid,
    read_gbuffer, read_snapshot, snapshot_path, write_gbuffer, write_snapshot, FormatError, Plane, Snapshot, Vgrid,
};
use emberfield::occupancy::LabeledPoint;
use emberfield::render::{GBuffer, Image};
use emberfield::scene::{write_demo, RunConfig};
use emberfield::spectral::LinearRgb;
use nalgebra::Vector3;
use proptest::prelude::*;

fn finite_f32() -> impl Strategy<Value = f32> {
    any::<u32>().prop_map(f32::from_bits).prop_filter("finite", |v| v.is_finite())
}

fn vgrid() -> impl Strategy<Value = Vgrid> {
    ([2usize..6, 2usize..6, 2usize..6], 0usize..4, -10.0f32..10.0, 1e-3f32..1.0).prop_flat_map(
        |(dims, nch, o, h)| {
            let n = dims[0] * dims[1] * dims[2];
            prop::collection::vec(prop::collection::vec(finite_f32(), n), nch).prop_map(move |channels| Vgrid {
                spec: GridSpec::new(dims, Vec3::new(o, -o, 0.5 * o), h).unwrap(),
                channels,
            })
        },
    )
}

fn points() -> impl Strategy<Value = Vec<LabeledPoint>> {
    prop::collection::vec(
        (any::<[u32; 3]>(), any::<u32>(), any::<u32>()).prop_map(|(p, o, m)| LabeledPoint {
            position: Vec3::new(f32::from_bits(p[0]), f32::from_bits(p[1]), f32::from_bits(p[2])),
            opacity: f32::from_bits(o),
            material_id: m,
        }),
        0..30,
    )
}

fn plane() -> impl Strategy<Value = Plane> {
    (0usize..7, 0usize..7, 1usize..5).prop_flat_map(|(w, h, c)| {
        prop::collection::vec(any::<u32>().prop_map(f32::from_bits), w * h * c)
            .prop_map(move |data| Plane { width: w, height: h, channels: c, data })
    })
}

fn bits(v: &[f32]) -> Vec<u32> {
    v.iter().map(|x| x.to_bits()).collect()
}

fn point_bits(p: &LabeledPoint) -> [u32; 5] {
    [p.position.x.to_bits(), p.position.y.to_bits(), p.position.z.to_bits(), p.opacity.to_bits(), p.material_id]
}

proptest! {
    #[test]
    fn vgrid_round_trips(g in vgrid()) {
        let bytes = encode_vgrid(&g).unwrap();
        prop_assert_eq!(bytes.len(), 40 + 4 * g.spec.cell_count() * g.channels.len());
        let back = decode_vgrid(&bytes).unwrap();
        prop_assert_eq!(back.spec, g.spec);
        prop_assert_eq!(back.channels.len(), g.channels.len());
        for (a, b) in back.channels.iter().zip(&g.channels) {
            prop_assert_eq!(bits(a), bits(b));
        }
    }

    #[test]
    fn vgrid_truncation_is_reported(g in vgrid(), cut in 0.0f64..1.0) {
        let bytes = encode_vgrid(&g).unwrap();
        let at = (cut * bytes.len() as f64) as usize;
        prop_assume!(at < bytes.len());
        prop_assert!(decode_vgrid(&bytes[..at]).is_err());
    }

    #[test]
    fn points_round_trip(p in points()) {
        let bytes = encode_points(&p);
        prop_assert_eq!(bytes.len(), 16 + 20 * p.len());
        let back = decode_points(&bytes).unwrap();
        prop_assert_eq!(back.iter().map(point_bits).collect::<Vec<_>>(), p.iter().map(point_bits).collect::<Vec<_>>());
    }

    #[test]
    fn points_truncation_names_the_offset(p in points(), cut in 0usize..1000) {
        let bytes = encode_points(&p);
        let at = cut % bytes.len();
        match decode_points(&bytes[..at]) {
            Err(FormatError::Truncated { offset, .. }) => prop_assert!(offset <= at),
            other => prop_assert!(false, "expected truncation, got {:?}", other),
        }
    }

    #[test]
    fn plane_round_trips(p in plane()) {
        let back = decode_plane(&encode_plane(&p).unwrap()).unwrap();
        prop_assert_eq!((back.width, back.height, back.channels), (p.width, p.height, p.channels));
        prop_assert_eq!(bits(&back.data), bits(&p.data));
    }

    #[test]
    fn ppm_round_trips(w in 1usize..9, h in 1usize..9, seed in any::<u64>()) {
        let data: Vec<u8> = (0..w * h * 3).map(|i| (seed.wrapping_mul(i as u64 + 1) >> 7) as u8).collect();
        let img = Image { width: w, height: h, data };
        prop_assert_eq!(decode_ppm(&encode_ppm(&img)).unwrap(), img);
    }
}

#[test]
fn two_by_two_single_channel_layout() {
    let spec = GridSpec::new([2, 2, 2], Vec3::new(1.0, 2.0, 3.0), 0.5).unwrap();
    let g = Vgrid { spec, channels: vec![(0..8).map(|v| v as f32).collect()] };
    let bytes = encode_vgrid(&g).unwrap();
    assert_eq!(bytes.len(), 40 + 32);
    assert_eq!(&bytes[..4], b"VGRD");
    assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
    assert_eq!(u32::from_le_bytes(bytes[20..24].try_into().unwrap()), 1);
    assert_eq!(f32::from_le_bytes(bytes[24..28].try_into().unwrap()), 1.0);
    assert_eq!(f32::from_le_bytes(bytes[36..40].try_into().unwrap()), 0.5);
    assert_eq!(f32::from_le_bytes(bytes[44..48].try_into().unwrap()), 1.0);
}

#[test]
fn snapshot_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let spec = GridSpec::new([4, 3, 5], Vec3::zeros(), 0.1).unwrap();
    let mut fire = FireState::new(spec);
    let mut char_state = CharState::new(spec, &CharParams::default());
    for (i, v) in fire.y.values_mut().iter_mut().enumerate() {
        *v = (i % 7) as f32 / 7.0;
    }
    for (i, v) in fire.u.values_mut().iter_mut().enumerate() {
        *v = Vec3::new(i as f32, -(i as f32), 0.25);
    }
    char_state.m_c.values_mut()[3] = 0.5;
    let snap = Snapshot { fire, char_state };
    let path = snapshot_path(dir.path(), 7);
    assert!(path.ends_with("frame_00007.vgrd"));
    write_snapshot(&path, &snap).unwrap();
    assert_eq!(read_snapshot(&path).unwrap(), snap);
}

#[test]
fn gbuffer_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let color = vec![LinearRgb::new(0.0, 0.5, 1.0), LinearRgb::new(0.2, 0.2, 0.2)];
    let g = GBuffer::new(2, 1, color, vec![1.5, f32::INFINITY], vec![Vector3::z(), -Vector3::x()]).unwrap();
    let stem = dir.path().join("view");
    write_gbuffer(&stem, &g).unwrap();
    let back = read_gbuffer(&stem).unwrap();
    assert_eq!(back.depth[0], 1.5);
    assert!(back.depth[1].is_infinite());
    assert_eq!(back.normal, g.normal);
    // color passes through 8-bit sRGB
    for (a, b) in back.color.iter().zip(&g.color) {
        assert!((a - b).abs().max() < 0.01);
    }
}

#[test]
fn demo_config_reloads_identically() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_demo(dir.path(), 32, 24).unwrap();
    let cfg = RunConfig::load(&path, &[]).unwrap();
    let again = RunConfig::from_document(&Document::parse(&cfg.to_text()).unwrap(), dir.path()).unwrap();
    assert_eq!(again, cfg);
    assert_eq!(cfg.cameras.len(), 2);
}

#[test]
fn overrides_reach_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_demo(dir.path(), 32, 24).unwrap();
    let set = |k: &str, v: &str| (k.to_string(), v.to_string());
    let cfg = RunConfig::load(&path, &[set("sim.alpha", "0.3"), set("sim.wind", "0.5,0,0")]).unwrap();
    assert_eq!(cfg.sim.alpha, 0.3);
    assert_eq!(cfg.sim.wind, Vec3::new(0.5, 0.0, 0.0));
    let err = RunConfig::load(&path, &[set("sim.alpah", "0.3")]).unwrap_err();
    assert!(err.to_string().contains("alpah"), "{err}");
}
