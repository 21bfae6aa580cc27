//! Adaptive Simpson quadrature on a finite interval.

/// Settings for [`integrate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Simpson {
    /// Absolute error target for integrals of order one. Integrals much
    /// smaller than one are refined to the same relative accuracy instead.
    pub tol: f64,
    pub max_depth: u32,
    /// Number of equal panels the interval is cut into before refinement.
    pub panels: usize,
}

impl Default for Simpson {
    fn default() -> Self {
        Simpson { tol: 1e-10, max_depth: 40, panels: 64 }
    }
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn refine(f: &impl Fn(f64) -> f64, p: Panel, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (p.a + p.b);
    let lm = 0.5 * (p.a + m);
    let rm = 0.5 * (m + p.b);
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(p.a, m, p.fa, flm, p.fm);
    let right = simpson(m, p.b, p.fm, frm, p.fb);
    let err = left + right - p.whole;
    if depth == 0 || err.abs() <= 15.0 * tol {
        return left + right + err / 15.0;
    }
    refine(f, Panel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left }, tol / 2.0, depth - 1)
        + refine(f, Panel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right }, tol / 2.0, depth - 1)
}

/// `∫_a^b f(x) dx`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, cfg: &Simpson) -> f64 {
    let n = cfg.panels.max(1);
    let h = (b - a) / n as f64;
    let panels: Vec<Panel> = (0..n)
        .map(|i| {
            let lo = a + h * i as f64;
            let hi = if i + 1 == n { b } else { lo + h };
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            Panel { a: lo, b: hi, fa, fm, fb, whole: simpson(lo, hi, fa, fm, fb) }
        })
        .collect();
    let coarse: f64 = panels.iter().map(|p| p.whole).sum();
    if coarse == 0.0 && panels.iter().all(|p| p.fa == 0.0 && p.fm == 0.0 && p.fb == 0.0) {
        return 0.0;
    }
    let scale = coarse.abs().clamp(f64::MIN_POSITIVE, 1.0);
    let tol = cfg.tol * scale / n as f64;
    panels.into_iter().map(|p| refine(&f, p, tol, cfg.max_depth)).sum()
}
