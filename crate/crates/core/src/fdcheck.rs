//! Central finite differences with Richardson extrapolation, for checking
//! jet-computed derivatives against an independent numeric estimate. Used
//! by the verification suites; nothing in the tensor pipeline depends on it.

/// First derivative along coordinate `i` of `f` at `x`, Richardson-
/// extrapolated central difference with base step `h`.
pub fn d1<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], i: usize, h: f64) -> f64 {
    let d = |h: f64| {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += h;
        xm[i] -= h;
        (f(&xp) - f(&xm)) / (2.0 * h)
    };
    richardson4(d(h), d(h / 2.0))
}

/// Mixed second derivative `d^2 f / dx_i dx_j`.
pub fn d2<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], i: usize, j: usize, h: f64) -> f64 {
    if i == j {
        let d = |h: f64| {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h;
            xm[i] -= h;
            (f(&xp) - 2.0 * f(x) + f(&xm)) / (h * h)
        };
        richardson4(d(h), d(h / 2.0))
    } else {
        let d = |h: f64| {
            let mut a = x.to_vec();
            let mut b = x.to_vec();
            let mut c = x.to_vec();
            let mut e = x.to_vec();
            a[i] += h;
            a[j] += h;
            b[i] += h;
            b[j] -= h;
            c[i] -= h;
            c[j] += h;
            e[i] -= h;
            e[j] -= h;
            (f(&a) - f(&b) - f(&c) + f(&e)) / (4.0 * h * h)
        };
        richardson4(d(h), d(h / 2.0))
    }
}

/// Third derivative `d^3 f / dx_i dx_j dx_k`, by differencing the
/// Richardson-extrapolated second derivative.
pub fn d3<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], i: usize, j: usize, k: usize, h: f64) -> f64 {
    let g = |x2: &[f64]| d2(f, x2, j, k, h);
    let d = |hh: f64| {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += hh;
        xm[i] -= hh;
        (g(&xp) - g(&xm)) / (2.0 * hh)
    };
    richardson4(d(h * 4.0), d(h * 2.0))
}

/// Combine two central-difference estimates (steps h, h/2) assuming an
/// O(h^2) leading error term.
fn richardson4(coarse: f64, fine: f64) -> f64 {
    fine + (fine - coarse) / 3.0
}

/// Relative deviation against a reference scale.
pub fn rel_err(got: f64, want: f64, scale: f64) -> f64 {
    (got - want).abs() / scale.abs().max(1.0)
}
