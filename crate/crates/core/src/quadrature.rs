//! Adaptive Gauss–Kronrod (7/15) integration.

#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};
use crate::scalar::Scalar;

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

/// Gauss weights for the nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<T: Scalar>(f: &impl Fn(T) -> T, a: T, b: T) -> (T, T) {
    let center = (a + b) * T::half();
    let half = (b - a) * T::half();
    let fc = f(center);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for k in 0..7 {
        let dx = half * T::lit(XGK[k]);
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * T::lit(WGK[k]);
        if k % 2 == 1 {
            gauss += pair * T::lit(WG[k / 2]);
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integrates `f` over `[a, b]` to the requested relative tolerance by
/// repeatedly bisecting the interval with the largest error estimate.
pub fn integrate<T: Scalar>(f: impl Fn(T) -> T, a: T, b: T, rel_tol: T, max_intervals: usize) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    let (value, error) = gk15(&f, a, b);
    let mut intervals = vec![(a, b, value, error)];
    let abs_floor = T::min_positive_value();
    for iteration in 0..max_intervals {
        let total: T = intervals.iter().fold(T::zero(), |s, iv| s + iv.2);
        let err: T = intervals.iter().fold(T::zero(), |s, iv| s + iv.3);
        if !total.is_finite() || !err.is_finite() {
            return Err(Error::NonConvergence {
                what: "adaptive quadrature",
                iterations: iteration,
                residual: f64::NAN,
            });
        }
        if err <= rel_tol * total.abs() || err <= abs_floor {
            return Ok(total);
        }
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = (lo + hi) * T::half();
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
    let total: T = intervals.iter().fold(T::zero(), |s, iv| s + iv.2);
    let err: T = intervals.iter().fold(T::zero(), |s, iv| s + iv.3);
    Err(Error::NonConvergence {
        what: "adaptive quadrature",
        iterations: max_intervals,
        residual: (err / total.abs()).to_f64_lossy(),
    })
}
