//! Blackbody emission and the color pipeline that turns it into pixels:
//! spectrum → CIE XYZ → CAT02 von Kries adaptation → linear sRGB → ACES → sRGB gamma.

use std::sync::OnceLock;

use nalgebra::{Matrix3, Vector3};

pub type Xyz = Vector3<f64>;
pub type LinearRgb = Vector3<f64>;

/// Display-referred sRGB, each channel in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplayRgb(pub [f64; 3]);

impl DisplayRgb {
    pub fn to_u8(self) -> [u8; 3] {
        self.0.map(|c| (c * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8)
    }
}

/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Speed of light, m/s.
pub const LIGHT_SPEED: f64 = 2.997_924_58e8;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// D65 reference white, Y = 1.
pub const D65_WHITE: [f64; 3] = [0.950_47, 1.0, 1.088_83];

#[rustfmt::skip]
pub const M_CAT02: [[f64; 3]; 3] = [
    [ 0.7328, 0.4296, -0.1624],
    [-0.7036, 1.6975,  0.0061],
    [ 0.0030, 0.0136,  0.9834],
];

/// CIE XYZ → linear sRGB (D65).
#[rustfmt::skip]
pub const XYZ_TO_SRGB: [[f64; 3]; 3] = [
    [ 3.240_454_2, -1.537_138_5, -0.498_531_4],
    [-0.969_266_0,  1.876_010_8,  0.041_556_0],
    [ 0.055_643_4, -0.204_025_9,  1.057_225_2],
];

fn mat(m: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|r, c| m[r][c])
}

/// Spectral radiance of a blackbody, W·sr⁻¹·m⁻³.
///
/// Panics unless both `wavelength` (m) and `temperature` (K) are positive.
pub fn planck_radiance(wavelength: f64, temperature: f64) -> f64 {
    assert!(wavelength > 0.0 && temperature > 0.0, "planck_radiance needs positive inputs");
    let x = PLANCK * LIGHT_SPEED / (wavelength * BOLTZMANN * temperature);
    2.0 * PLANCK * LIGHT_SPEED * LIGHT_SPEED / wavelength.powi(5) / x.exp_m1()
}

const CIE_CSV: &str = include_str!("../data/cie1931_2deg_5nm.csv");

struct CieRaw {
    nm: Vec<f64>,
    cmf: Vec<[f64; 3]>,
}

fn cie_raw() -> &'static CieRaw {
    static RAW: OnceLock<CieRaw> = OnceLock::new();
    RAW.get_or_init(|| {
        let mut nm = Vec::new();
        let mut cmf = Vec::new();
        for line in CIE_CSV.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
            let v: Vec<f64> = line.split(',').map(|s| s.trim().parse().expect("cie table")).collect();
            nm.push(v[0]);
            cmf.push([v[1], v[2], v[3]]);
        }
        CieRaw { nm, cmf }
    })
}

/// Wavelength samples with CIE 1931 2° color matching functions.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralTable {
    /// Ascending, meters.
    pub wavelengths: Vec<f64>,
    pub xbar: Vec<f64>,
    pub ybar: Vec<f64>,
    pub zbar: Vec<f64>,
}

impl Default for SpectralTable {
    fn default() -> Self {
        Self::cie1931(40)
    }
}

impl SpectralTable {
    /// `bins` uniform samples over 380–780 nm, endpoints included, with the
    /// 5 nm CIE tables linearly interpolated onto them.
    pub fn cie1931(bins: usize) -> Self {
        assert!(bins >= 2, "need at least two wavelength samples");
        let raw = cie_raw();
        let (lo, hi) = (380.0, 780.0);
        let mut t = Self { wavelengths: vec![], xbar: vec![], ybar: vec![], zbar: vec![] };
        for b in 0..bins {
            let nm = lo + (hi - lo) * b as f64 / (bins - 1) as f64;
            let pos = (nm - raw.nm[0]) / 5.0;
            let i0 = (pos.floor() as usize).min(raw.nm.len() - 2);
            let f = pos - i0 as f64;
            let v: [f64; 3] = std::array::from_fn(|a| raw.cmf[i0][a] * (1.0 - f) + raw.cmf[i0 + 1][a] * f);
            t.wavelengths.push(nm * 1e-9);
            t.xbar.push(v[0]);
            t.ybar.push(v[1]);
            t.zbar.push(v[2]);
        }
        t
    }

    pub fn len(&self) -> usize {
        self.wavelengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wavelengths.is_empty()
    }

    /// Trapezoid weights, so that `∫f dλ ≈ Σ w_i f_i`.
    fn trapezoid_weight(&self, i: usize) -> f64 {
        let w = &self.wavelengths;
        let left = if i > 0 { w[i] - w[i - 1] } else { 0.0 };
        let right = if i + 1 < w.len() { w[i + 1] - w[i] } else { 0.0 };
        0.5 * (left + right)
    }

    pub fn planck_spectrum(&self, temperature: f64) -> Vec<f64> {
        self.wavelengths.iter().map(|&l| planck_radiance(l, temperature)).collect()
    }
}

/// Trapezoidal integral of `samples·(x̄, ȳ, z̄)` over wavelength.
///
/// Panics if `samples` is not aligned with `table`.
pub fn spectrum_to_xyz(samples: &[f64], table: &SpectralTable) -> Xyz {
    assert_eq!(samples.len(), table.len(), "spectrum length must match the table");
    let mut xyz = Xyz::zeros();
    for (i, &s) in samples.iter().enumerate() {
        let w = table.trapezoid_weight(i) * s;
        xyz += Xyz::new(table.xbar[i], table.ybar[i], table.zbar[i]) * w;
    }
    xyz
}

/// XYZ of a blackbody at `temperature`.
pub fn blackbody_xyz(temperature: f64, table: &SpectralTable) -> Xyz {
    spectrum_to_xyz(&table.planck_spectrum(temperature), table)
}

/// Von Kries adaptation in CAT02 LMS space from a source white to D65.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChromaticAdaptation {
    matrix: Matrix3<f64>,
    /// Source white normalized to Y = 1.
    pub white: Xyz,
}

impl ChromaticAdaptation {
    /// Adapts from an arbitrary white; panics if its LMS response is not
    /// strictly positive.
    pub fn from_white(white: Xyz) -> Self {
        let white = white / white.y;
        let m = mat(&M_CAT02);
        let lms_white = m * white;
        let lms_d65 = m * Xyz::from(D65_WHITE);
        assert!(lms_white.iter().all(|&c| c > 0.0), "degenerate adaptation white");
        let gain = Matrix3::from_diagonal(&lms_d65.component_div(&lms_white));
        let inv = m.try_inverse().expect("CAT02 is invertible");
        Self { matrix: inv * gain * m, white }
    }

    /// Adapts so that the blackbody at `t_max` renders as D65.
    pub fn for_blackbody(t_max: f64, table: &SpectralTable) -> Self {
        assert!(t_max > 0.0, "adaptation temperature must be positive");
        Self::from_white(blackbody_xyz(t_max, table))
    }

    pub fn apply(&self, xyz: &Xyz) -> Xyz {
        self.matrix * xyz
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.matrix
    }
}

pub fn adapt_cat02(color: &Xyz, t_max: f64, table: &SpectralTable) -> Xyz {
    ChromaticAdaptation::for_blackbody(t_max, table).apply(color)
}

pub fn xyz_to_linear_srgb(xyz: &Xyz) -> LinearRgb {
    mat(&XYZ_TO_SRGB) * xyz
}

/// Narkowicz's ACES filmic fit, clamped to [0, 1].
#[inline]
pub fn aces(x: f64) -> f64 {
    // the rational fit turns back up for negative x
    let x = x.max(0.0);
    (x * (2.51 * x + 0.03) / (x * (2.43 * x + 0.59) + 0.14)).clamp(0.0, 1.0)
}

#[inline]
pub fn srgb_encode(linear: f64) -> f64 {
    let c = linear.clamp(0.0, 1.0);
    if c <= 0.003_130_8 {
        12.92 * c
    } else if c >= 1.0 {
        1.0
    } else {
        (1.055 * c.powf(1.0 / 2.4) - 0.055).min(1.0)
    }
}

#[inline]
pub fn srgb_decode(encoded: f64) -> f64 {
    let c = encoded.clamp(0.0, 1.0);
    if c <= 0.040_45 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

/// Exposure, ACES and gamma applied to a linear sRGB value.
pub fn linear_to_display(rgb: &LinearRgb, exposure: f64) -> DisplayRgb {
    DisplayRgb(std::array::from_fn(|a| srgb_encode(aces(rgb[a] * exposure))))
}

pub fn xyz_to_display(color: &Xyz, exposure: f64) -> DisplayRgb {
    linear_to_display(&xyz_to_linear_srgb(color), exposure)
}
