//! Adaptive Gauss-Kronrod quadrature (7-15 pair).
//!
//! Deterministic panel ordering: panels are processed worst-error-first from
//! a heap keyed by (error, interval), so identical inputs produce identical
//! sums.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// 15-point Kronrod abscissae (positive half, descending).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
/// 7-point Gauss weights.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];
/// 15-point Kronrod weights.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_84,
];

/// Result of a single Gauss-Kronrod panel evaluation.
#[derive(Clone, Copy, Debug)]
pub struct Panel {
    pub a: f64,
    pub b: f64,
    pub value: f64,
    pub error: f64,
}

/// One 15-point Kronrod evaluation with embedded 7-point Gauss error estimate.
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..3 {
        let idx = 2 * j + 1;
        let x = half * XGK[idx];
        let fsum = f(center - x) + f(center + x);
        gauss += WG[j] * fsum;
        kron += WGK[idx] * fsum;
    }
    for j in 0..4 {
        let idx = 2 * j;
        let x = half * XGK[idx];
        let fsum = f(center - x) + f(center + x);
        kron += WGK[idx] * fsum;
    }
    let value = kron * half;
    let error = ((kron - gauss) * half).abs();
    Panel { a, b, value, error }
}

#[derive(Debug)]
struct HeapPanel(Panel);

impl PartialEq for HeapPanel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapPanel {}
impl PartialOrd for HeapPanel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapPanel {
    fn cmp(&self, other: &Self) -> Ordering {
        // worst error first; tie-break on the left endpoint for determinism
        self.0
            .error
            .total_cmp(&other.0.error)
            .then(other.0.a.total_cmp(&self.0.a))
    }
}

/// Integral value plus a conservative error bound.
#[derive(Clone, Copy, Debug, Default)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

/// Adaptively integrates `f` over the union of `seeds` intervals until the
/// summed Kronrod error estimate drops below `tol` (absolute) or the panel
/// budget is exhausted. Seed boundaries are never crossed, so integrand kinks
/// known in advance should be seed endpoints.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: &F,
    seeds: &[(f64, f64)],
    tol: f64,
    max_panels: usize,
) -> QuadResult {
    let mut heap = BinaryHeap::new();
    let mut value = 0.0;
    let mut error = 0.0;
    for &(a, b) in seeds {
        if b <= a {
            continue;
        }
        let p = gk15(f, a, b);
        value += p.value;
        error += p.error;
        heap.push(HeapPanel(p));
    }
    let mut panels = heap.len();
    while error > tol && panels < max_panels {
        let Some(HeapPanel(worst)) = heap.pop() else {
            break;
        };
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            // interval no longer splittable in f64; keep its error and stop
            heap.push(HeapPanel(worst));
            break;
        }
        let left = gk15(f, worst.a, mid);
        let right = gk15(f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(HeapPanel(left));
        heap.push(HeapPanel(right));
        panels += 1;
    }
    // recompute error as the heap sum to avoid drift from cancellation
    let error = heap.iter().map(|p| p.0.error).sum::<f64>();
    QuadResult { value, error }
}

/// Convenience wrapper for a single interval.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> QuadResult {
    integrate_adaptive(f, &[(a, b)], tol, 4096)
}
