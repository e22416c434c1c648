//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Intervals are kept in a max-heap keyed by their local error estimate and
//! the worst one is bisected until the summed error meets the requested
//! tolerance. Error estimation follows the usual QUADPACK heuristics.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::sum::CompensatedSum;

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

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_intervals: 2000,
        }
    }
}

impl QuadOptions {
    pub fn absolute(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol: 0.0,
            ..Self::default()
        }
    }

    pub fn relative(rel_tol: f64) -> Self {
        Self {
            abs_tol: 0.0,
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    pub intervals: usize,
    pub evaluations: usize,
}

/// Returned when the interval budget runs out before the tolerance is met.
/// Carries the best estimate reached so far.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadFailure {
    pub estimate: QuadResult,
}

#[derive(Debug, Clone, Copy)]
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

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut err = err.abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * res_abs;
        if min_err > err {
            err = min_err;
        }
    }
    err
}

/// One 15-point Kronrod panel on [a, b]. Returns (value, error estimate).
fn kronrod_panel<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut res_k = f_center * WGK[7];
    let mut res_g = f_center * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];

    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_k * half;
    let err = rescale_error((res_k - res_g) * half, res_abs * half.abs(), res_asc * half.abs());
    (value, err)
}

/// Nodes and weights of the composite 15-point Kronrod rule over the
/// panels delimited by `breaks` (increasing).
pub fn composite_kronrod(breaks: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(15 * breaks.len().saturating_sub(1));
    for w in breaks.windows(2) {
        let center = 0.5 * (w[0] + w[1]);
        let half = 0.5 * (w[1] - w[0]);
        for j in 0..7 {
            out.push((center - half * XGK[j], half * WGK[j]));
            out.push((center + half * XGK[j], half * WGK[j]));
        }
        out.push((center, half * WGK[7]));
    }
    out
}

/// Integrate `f` over the finite interval [a, b].
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    opts: QuadOptions,
) -> Result<QuadResult, QuadFailure> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            abs_err: 0.0,
            intervals: 0,
            evaluations: 0,
        });
    }
    let (value, err) = kronrod_panel(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, err });
    let mut evaluations = 15;
    let mut total = value;
    let mut total_err = err;

    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * total.abs());
        if total_err <= tol {
            break;
        }
        if heap.len() >= opts.max_intervals {
            return Err(QuadFailure {
                estimate: finish(&heap, evaluations),
            });
        }
        let worst = heap.pop().expect("heap never empties");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // interval cannot be split further in floating point
            heap.push(worst);
            return Err(QuadFailure {
                estimate: finish(&heap, evaluations),
            });
        }
        let (v1, e1) = kronrod_panel(&mut f, worst.a, mid);
        let (v2, e2) = kronrod_panel(&mut f, mid, worst.b);
        evaluations += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Segment { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, err: e2 });
    }

    Ok(finish(&heap, evaluations))
}

fn finish(heap: &BinaryHeap<Segment>, evaluations: usize) -> QuadResult {
    // re-sum from scratch so the running update's rounding does not leak out
    let mut segs: Vec<&Segment> = heap.iter().collect();
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut value = CompensatedSum::new();
    let mut err = 0.0;
    for s in segs {
        value.add(s.value);
        err += s.err;
    }
    QuadResult {
        value: value.value(),
        abs_err: err,
        intervals: heap.len(),
        evaluations,
    }
}

/// Integrate `f` over [a, ∞) using the map x = a + scale·t/(1−t), t ∈ [0, 1).
///
/// `scale` should be of the order of the width of the integrand's mass; the
/// adaptive subdivision then handles the rest.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    scale: f64,
    opts: QuadOptions,
) -> Result<QuadResult, QuadFailure> {
    let g = move |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let one_minus = 1.0 - t;
        let x = a + scale * t / one_minus;
        let jac = scale / (one_minus * one_minus);
        let v = f(x) * jac;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate(g, 0.0, 1.0, opts)
}

/// Integrate `f` over (−∞, b] by reflection.
pub fn integrate_from_neg_infinity<F: FnMut(f64) -> f64>(
    mut f: F,
    b: f64,
    scale: f64,
    opts: QuadOptions,
) -> Result<QuadResult, QuadFailure> {
    integrate_to_infinity(move |x| f(-x), -b, scale, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composite_rule_integrates_a_gaussian() {
        let breaks: Vec<f64> = (0..=40).map(|i| i as f64 * 0.25).collect();
        let v: f64 = composite_kronrod(&breaks).iter().map(|&(x, w)| w * (-0.5 * x * x).exp()).sum();
        assert!((v - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, QuadOptions::default()).unwrap();
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert!((r.value - exact).abs() < 1e-13);
        assert_eq!(r.intervals, 1);
    }

    #[test]
    fn gaussian_tail_to_infinity() {
        let r = integrate_to_infinity(
            |x| (-0.5 * x * x).exp(),
            0.0,
            1.0,
            QuadOptions::relative(1e-13),
        )
        .unwrap();
        let exact = (std::f64::consts::PI / 2.0).sqrt();
        assert!((r.value - exact).abs() / exact < 1e-13, "{}", r.value);
    }

    #[test]
    fn endpoint_singularity_converges() {
        let r = integrate(|x: f64| x.sqrt().recip(), 0.0, 1.0, QuadOptions::relative(1e-10)).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn budget_exhaustion_reports_estimate() {
        let opts = QuadOptions {
            abs_tol: 1e-15,
            rel_tol: 0.0,
            max_intervals: 3,
        };
        let err = integrate(|x: f64| (50.0 * x).sin().abs(), 0.0, 10.0, opts).unwrap_err();
        assert!(err.estimate.value > 0.0);
        assert!(err.estimate.intervals <= 3);
    }
}
