//! One-dimensional maximization primitives used by the pattern optimizers.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a maximum of `f` on `[a, b]`, shrinking the
/// bracket until it is narrower than `tol`. Returns the best evaluated point.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    if b < a {
        std::mem::swap(&mut a, &mut b);
    }
    if b - a <= tol {
        let x = 0.5 * (a + b);
        return (x, f(x));
    }
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Sample points `lo, lo + step, …` up to and including `hi`.
pub fn grid_points(lo: f64, hi: f64, step: f64) -> impl Iterator<Item = f64> {
    let span = (hi - lo).max(0.0);
    let steps = (span / step).floor() as usize;
    let last = lo + steps as f64 * step;
    let tail = (hi - last > 1e-12 * step).then_some(hi);
    (0..=steps).map(move |i| lo + i as f64 * step).chain(tail)
}

/// Exhaustive grid maximization; ties go to the smallest coordinate.
pub fn grid_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> (f64, f64) {
    let mut best = (lo, f64::NEG_INFINITY);
    for x in grid_points(lo, hi, step) {
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}
