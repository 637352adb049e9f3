//! Globally adaptive 15-point Gauss–Kronrod quadrature on finite intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::SpecfunError;

/// Tolerances and subdivision budget for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { rel_tol: 1e-9, abs_tol: 1e-12, max_subdivisions: 2000 }
    }
}

impl QuadratureSpec {
    pub fn with_rel_tol(self, rel_tol: f64) -> Self {
        QuadratureSpec { rel_tol, ..self }
    }

    pub fn with_abs_tol(self, abs_tol: f64) -> Self {
        QuadratureSpec { abs_tol, ..self }
    }

    fn check(&self) -> Result<(), SpecfunError> {
        if self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.max_subdivisions >= 1 {
            Ok(())
        } else {
            Err(SpecfunError::InvalidSpec)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_err: f64,
    pub subdivisions: usize,
}

// Kronrod abscissae (positive half, descending); odd indices are the
// 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Integrates `f` over `[a, b]`, bisecting the worst segment until the
/// summed error estimate meets `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Estimate, SpecfunError> {
    spec.check()?;
    let (value, err) = gauss_kronrod(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, err });
    let mut total = value;
    let mut total_err = err;
    let mut subdivisions = 1;

    loop {
        let tol = spec.abs_tol.max(spec.rel_tol * total.abs());
        if total_err <= tol {
            break;
        }
        if !total.is_finite() || !total_err.is_finite() {
            return Err(SpecfunError::Convergence { achieved: total_err, requested: tol });
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(SpecfunError::Convergence { achieved: total_err, requested: tol });
        }
        let worst = heap.pop().expect("heap never empty");
        let mid = 0.5 * (worst.a + worst.b);
        let (lv, le) = gauss_kronrod(&f, worst.a, mid);
        let (rv, re) = gauss_kronrod(&f, mid, worst.b);
        total += lv + rv - worst.value;
        total_err += le + re - worst.err;
        heap.push(Segment { a: worst.a, b: mid, value: lv, err: le });
        heap.push(Segment { a: mid, b: worst.b, value: rv, err: re });
        subdivisions += 1;
    }

    // Re-sum from the segments so running updates do not leak rounding.
    let (value, abs_err) = heap.iter().fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.err));
    Ok(Estimate { value, abs_err, subdivisions })
}
