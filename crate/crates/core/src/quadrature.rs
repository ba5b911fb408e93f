//! Gauss–Legendre rules, composite panels and a simple adaptive integrator.
//! Used by the direct-integration oracle for the test statistic.

/// Nodes and weights of the `order`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pnm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// A one-dimensional quadrature rule `Σ w_i f(t_i)`.
#[derive(Debug, Clone, Default)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// `panels` equal Gauss–Legendre panels of `order` points on `[a, b]`.
    pub fn composite(a: f64, b: f64, panels: usize, order: usize) -> Rule {
        let (gx, gw) = gauss_legendre(order);
        let mut rule = Rule::default();
        rule.append_composite(a, b, panels, &gx, &gw);
        rule
    }

    pub(crate) fn append_composite(
        &mut self,
        a: f64,
        b: f64,
        panels: usize,
        gx: &[f64],
        gw: &[f64],
    ) {
        let h = (b - a) / panels as f64;
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * h;
            for (x, w) in gx.iter().zip(gw) {
                self.nodes.push(mid + 0.5 * h * x);
                self.weights.push(0.5 * h * w);
            }
        }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Adaptive bisection with a 15-point Gauss–Legendre rule; an interval is
/// accepted when the two-half estimate agrees with the whole to `tol`.
pub fn adaptive_integrate(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (gx, gw) = gauss_legendre(15);
    let gl = |lo: f64, hi: f64| -> f64 {
        let (m, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        r * gx.iter().zip(&gw).map(|(x, w)| w * f(m + r * x)).sum::<f64>()
    };
    fn recurse(gl: &dyn Fn(f64, f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (l, r) = (gl(a, m), gl(m, b));
        if (l + r - whole).abs() <= tol || depth >= 40 {
            l + r
        } else {
            recurse(gl, a, m, l, 0.5 * tol, depth + 1) + recurse(gl, m, b, r, 0.5 * tol, depth + 1)
        }
    }
    recurse(&gl, a, b, gl(a, b), tol, 0)
}
