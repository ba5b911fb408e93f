//! The test statistic `T_n`: `n` times the weighted L² distance between the
//! joint empirical characteristic function of `(ε̂_j, X_{j-1}, ..., X_{j-k})`
//! and the product of its marginals.
//!
//! [`statistic_closed_form`] uses the pairwise-sum representation available
//! for product weights:
//!
//! ```text
//! T_n = n·[A·B + P − 2·Σ_s w̄_s a_s b_s]
//! a_s = Σ_s' w̄_s' F0(ε̂_s − ε̂_s')
//! b_s = Σ_s' w̄_s' ∏_j Fj(X_{s−j} − X_{s'−j})
//! A = Σ w̄_s a_s,  B = Σ w̄_s b_s,  P = Σ_{s,s'} w̄_s w̄_s' F0(·)∏Fj(·)
//! ```
//!
//! where `F` is the cosine transform of the weight factor. Cost is `O(n²k)`.
//! [`statistic_quadrature`] integrates the defining expression directly and
//! serves as the reference for small inputs.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::kernel::ResidualSet;
use crate::quadrature::{gauss_legendre, Rule};
use crate::series::TimeSeries;
use crate::weight::{WeightFamily, WeightSpec};

/// Above this many kept observations the pairwise matrices are not
/// materialized.
pub const DENSE_LIMIT: usize = 8000;

const DEFAULT_TILE: usize = 512;
const PARALLEL_ROWS: usize = 1024;
const LOG_PRODUCT_LAGS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct StatisticInput {
    residuals: Vec<f64>,
    weights: Vec<f64>,
    lags: Vec<Vec<f64>>,
    weight: WeightSpec,
}

impl StatisticInput {
    /// `lags[ν-1][j]` holds `X_{j-ν}`.
    pub fn new(
        residuals: Vec<f64>,
        weights: Vec<f64>,
        lags: Vec<Vec<f64>>,
        weight: WeightSpec,
    ) -> Result<Self> {
        let n = residuals.len();
        if weights.len() != n || lags.iter().any(|c| c.len() != n) {
            return Err(invalid("residual, weight and lag lengths must agree"));
        }
        if lags.is_empty() {
            return Err(invalid("at least one lag is required"));
        }
        if weight.k() != lags.len() {
            return Err(invalid(format!(
                "weight has {} lag coordinates but input has k = {}",
                weight.k(),
                lags.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(invalid("weights must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("weights must sum to 1, got {total}")));
        }
        let finite = |v: &f64| v.is_finite();
        if !residuals.iter().all(finite) || !lags.iter().flatten().all(finite) {
            return Err(invalid("residuals and lags must be finite"));
        }
        Ok(StatisticInput {
            residuals,
            weights,
            lags,
            weight,
        })
    }

    /// Assemble from a series and its residuals; `k` is the series lag depth.
    pub fn from_residuals(series: &TimeSeries, res: &ResidualSet, weight: WeightSpec) -> Result<Self> {
        let k = series.lag_depth();
        if res.eps_hat.len() != series.n() {
            return Err(invalid("residual set does not match the series"));
        }
        let lags = (1..=k).map(|nu| series.lag_column(nu).to_vec()).collect();
        Self::new(res.eps_hat.clone(), res.weights.clone(), lags, weight)
    }

    pub fn n(&self) -> usize {
        self.residuals.len()
    }

    pub fn k(&self) -> usize {
        self.lags.len()
    }

    pub fn weight(&self) -> &WeightSpec {
        &self.weight
    }

    /// The observations with positive weight, lags stored row-major.
    fn compact(&self) -> Result<Compact> {
        let idx: Vec<usize> = (0..self.n()).filter(|&j| self.weights[j] > 0.0).collect();
        if idx.len() < 2 {
            return Err(Error::DegenerateInput(format!(
                "{} observation(s) carry positive weight, need at least 2",
                idx.len()
            )));
        }
        let k = self.k();
        let mut lag_rows = Vec::with_capacity(idx.len() * k);
        for &j in &idx {
            lag_rows.extend(self.lags.iter().map(|c| c[j]));
        }
        Ok(Compact {
            eps: idx.iter().map(|&j| self.residuals[j]).collect(),
            w: idx.iter().map(|&j| self.weights[j]).collect(),
            lag_rows,
            k,
        })
    }
}

struct Compact {
    eps: Vec<f64>,
    w: Vec<f64>,
    lag_rows: Vec<f64>,
    k: usize,
}

impl Compact {
    fn len(&self) -> usize {
        self.eps.len()
    }

    fn lag_row(&self, i: usize) -> &[f64] {
        &self.lag_rows[i * self.k..(i + 1) * self.k]
    }
}

/// Per-pair transforms `F0(Δε)` and `∏_j Fj(ΔX_j)`.
struct PairTransform {
    family: WeightFamily,
    gammas: Vec<f64>,
    // Gaussian: F(x) = scale·exp(−x²·rate)
    scale0: f64,
    rate0: f64,
    scale_lag: f64,
    rates: Vec<f64>,
    log_product: bool,
}

impl PairTransform {
    fn new(weight: &WeightSpec) -> Self {
        let gammas = weight.gammas().to_vec();
        let scale = |g: f64| (std::f64::consts::PI / g).sqrt();
        PairTransform {
            family: weight.family(),
            scale0: scale(gammas[0]),
            rate0: 0.25 / gammas[0],
            scale_lag: gammas[1..].iter().map(|&g| scale(g)).product(),
            rates: gammas[1..].iter().map(|g| 0.25 / g).collect(),
            log_product: gammas.len() - 1 > LOG_PRODUCT_LAGS,
            gammas,
        }
    }

    #[inline]
    fn eval(&self, de: f64, xi: &[f64], xj: &[f64]) -> (f64, f64) {
        match self.family {
            WeightFamily::Gaussian => {
                let f0 = self.scale0 * (-de * de * self.rate0).exp();
                let mut expo = 0.0;
                for ((a, b), r) in xi.iter().zip(xj).zip(&self.rates) {
                    let d = a - b;
                    expo += d * d * r;
                }
                (f0, self.scale_lag * (-expo).exp())
            }
            WeightFamily::Laplace => {
                let g0 = self.gammas[0];
                let f0 = 2.0 * g0 / (g0 * g0 + de * de);
                let lag_gammas = &self.gammas[1..];
                let fx = if self.log_product {
                    let mut s = 0.0;
                    for ((a, b), g) in xi.iter().zip(xj).zip(lag_gammas) {
                        let d = a - b;
                        s += (2.0 * g / (g * g + d * d)).ln();
                    }
                    s.exp()
                } else {
                    let mut p = 1.0;
                    for ((a, b), g) in xi.iter().zip(xj).zip(lag_gammas) {
                        let d = a - b;
                        p *= 2.0 * g / (g * g + d * d);
                    }
                    p
                };
                (f0, fx)
            }
        }
    }
}

/// Row sums `a_s`, `b_s`, `p_s = Σ_s' w̄_s' F0·∏Fj`.
struct RowSums {
    a: Vec<f64>,
    b: Vec<f64>,
    p: Vec<f64>,
}

fn combine(n: usize, w: &[f64], rows: &RowSums) -> f64 {
    let mut big_a = 0.0;
    let mut big_b = 0.0;
    let mut big_p = 0.0;
    let mut cross = 0.0;
    for i in 0..w.len() {
        big_a += w[i] * rows.a[i];
        big_b += w[i] * rows.b[i];
        big_p += w[i] * rows.p[i];
        cross += w[i] * rows.a[i] * rows.b[i];
    }
    let t = n as f64 * (big_a * big_b + big_p - 2.0 * cross);
    let scale = n as f64 * (big_a * big_b + big_p);
    debug_assert!(t >= -1e-10 * scale.max(1.0), "negative statistic {t}");
    t.max(0.0)
}

fn dense_rows(c: &Compact, pt: &PairTransform) -> RowSums {
    let m = c.len();
    let mut f0 = vec![0.0; m * m];
    let mut fx = vec![0.0; m * m];
    if m >= PARALLEL_ROWS {
        f0.par_chunks_mut(m)
            .zip(fx.par_chunks_mut(m))
            .enumerate()
            .for_each(|(i, (r0, rx))| {
                for j in 0..m {
                    let (a, b) = pt.eval(c.eps[i] - c.eps[j], c.lag_row(i), c.lag_row(j));
                    r0[j] = a;
                    rx[j] = b;
                }
            });
    } else {
        for i in 0..m {
            let (a, b) = pt.eval(0.0, c.lag_row(i), c.lag_row(i));
            f0[i * m + i] = a;
            fx[i * m + i] = b;
            for j in i + 1..m {
                let (a, b) = pt.eval(c.eps[i] - c.eps[j], c.lag_row(i), c.lag_row(j));
                f0[i * m + j] = a;
                f0[j * m + i] = a;
                fx[i * m + j] = b;
                fx[j * m + i] = b;
            }
        }
    }
    let mut rows = RowSums {
        a: vec![0.0; m],
        b: vec![0.0; m],
        p: vec![0.0; m],
    };
    for i in 0..m {
        let r0 = &f0[i * m..(i + 1) * m];
        let rx = &fx[i * m..(i + 1) * m];
        let (mut a, mut b, mut p) = (0.0, 0.0, 0.0);
        for j in 0..m {
            a += c.w[j] * r0[j];
            b += c.w[j] * rx[j];
            p += c.w[j] * r0[j] * rx[j];
        }
        rows.a[i] = a;
        rows.b[i] = b;
        rows.p[i] = p;
    }
    rows
}

fn tiled_rows(c: &Compact, pt: &PairTransform, tile: usize) -> RowSums {
    let m = c.len();
    let tile = tile.max(1);
    let starts: Vec<usize> = (0..m).step_by(tile).collect();
    // one partial accumulator per row tile, merged in tile order
    let partials: Vec<(usize, RowSums)> = starts
        .par_iter()
        .map(|&i0| {
            let i1 = (i0 + tile).min(m);
            let mut rows = RowSums {
                a: vec![0.0; i1 - i0],
                b: vec![0.0; i1 - i0],
                p: vec![0.0; i1 - i0],
            };
            for i in i0..i1 {
                let (mut a, mut b, mut p) = (0.0, 0.0, 0.0);
                for j in 0..m {
                    let (f0, fx) = pt.eval(c.eps[i] - c.eps[j], c.lag_row(i), c.lag_row(j));
                    a += c.w[j] * f0;
                    b += c.w[j] * fx;
                    p += c.w[j] * f0 * fx;
                }
                rows.a[i - i0] = a;
                rows.b[i - i0] = b;
                rows.p[i - i0] = p;
            }
            (i0, rows)
        })
        .collect();
    let mut rows = RowSums {
        a: Vec::with_capacity(m),
        b: Vec::with_capacity(m),
        p: Vec::with_capacity(m),
    };
    for (_, part) in partials {
        rows.a.extend(part.a);
        rows.b.extend(part.b);
        rows.p.extend(part.p);
    }
    rows
}

/// `T_n` via pairwise sums. Dense matrices up to [`DENSE_LIMIT`] kept
/// observations, tiled streaming above.
pub fn statistic_closed_form(input: &StatisticInput) -> Result<f64> {
    let c = input.compact()?;
    let pt = PairTransform::new(&input.weight);
    let rows = if c.len() <= DENSE_LIMIT {
        dense_rows(&c, &pt)
    } else {
        tiled_rows(&c, &pt, DEFAULT_TILE)
    };
    Ok(combine(input.n(), &c.w, &rows))
}

/// `T_n` via the streaming evaluation with row tiles of `tile` rows;
/// memory is `O(n)`.
pub fn statistic_tiled(input: &StatisticInput, tile: usize) -> Result<f64> {
    let c = input.compact()?;
    let pt = PairTransform::new(&input.weight);
    let rows = tiled_rows(&c, &pt, tile);
    Ok(combine(input.n(), &c.w, &rows))
}

/// Grid controls for [`statistic_quadrature`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Gauss–Legendre points per panel.
    pub order: usize,
    /// Largest phase change `(max Δ data)·(panel width)` allowed in a panel.
    pub max_phase: f64,
    /// The integration box ends where the weight factor drops to `e^{-decay}`.
    pub decay: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            order: 16,
            max_phase: 12.0,
            decay: 30.0,
        }
    }
}

impl QuadratureSpec {
    /// Twice as many nodes per coordinate.
    pub fn refined(self) -> Self {
        QuadratureSpec {
            max_phase: 0.5 * self.max_phase,
            ..self
        }
    }
}

/// Rule on `[0, L]` including the weight factor `V(t)`.
fn half_line_rule(
    family: WeightFamily,
    gamma: f64,
    spread: f64,
    spec: &QuadratureSpec,
    gl: &(Vec<f64>, Vec<f64>),
) -> Rule {
    let (length, shape_width) = match family {
        WeightFamily::Laplace => (spec.decay / gamma, 4.0 / gamma),
        WeightFamily::Gaussian => ((spec.decay / gamma).sqrt(), 1.0 / gamma.sqrt()),
    };
    let phase_width = if spread > 0.0 {
        spec.max_phase / spread
    } else {
        f64::INFINITY
    };
    let width = phase_width.min(shape_width);
    let panels = (length / width).ceil().max(1.0) as usize;
    let mut rule = Rule::default();
    rule.append_composite(0.0, length, panels, &gl.0, &gl.1);
    for (t, w) in rule.nodes.iter().zip(rule.weights.iter_mut()) {
        *w *= family.weight(gamma, *t);
    }
    rule
}

fn mirrored(rule: &Rule) -> Rule {
    let mut out = Rule::default();
    for (t, w) in rule.nodes.iter().zip(&rule.weights).rev() {
        out.nodes.push(-t);
        out.weights.push(*w);
    }
    out.nodes.extend(&rule.nodes);
    out.weights.extend(&rule.weights);
    out
}

fn range(xs: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    hi - lo
}

/// `(cos, sin)` of `t·x_j` for every node `t` and observation `j`.
fn phase_table(rule: &Rule, xs: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(rule.len() * xs.len());
    for &t in &rule.nodes {
        out.extend(xs.iter().map(|&x| {
            let (s, c) = (t * x).sin_cos();
            (c, s)
        }));
    }
    out
}

/// `T_n` by direct tensor-product quadrature of
/// `n ∫ |φ̂_joint(t) − φ̂_ε(t_0) φ̂_X(t_1..t_k)|² W(t) dt`, for `k <= 2`.
pub fn statistic_quadrature(input: &StatisticInput, spec: &QuadratureSpec) -> Result<f64> {
    let k = input.k();
    if k > 2 {
        return Err(Error::UnsupportedDimension(k));
    }
    let c = input.compact()?;
    let m = c.len();
    let weight = &input.weight;
    let gl = gauss_legendre(spec.order);

    // |D(t)|² is even under t -> -t, so t_0 only runs over [0, ∞).
    let rule0 = half_line_rule(
        weight.family(),
        weight.gammas()[0],
        range(c.eps.iter().copied()),
        spec,
        &gl,
    );
    let lag_rules: Vec<Rule> = (0..k)
        .map(|d| {
            let col = (0..m).map(|i| c.lag_row(i)[d]);
            mirrored(&half_line_rule(
                weight.family(),
                weight.gammas()[d + 1],
                range(col),
                spec,
                &gl,
            ))
        })
        .collect();
    let table0 = phase_table(&rule0, &c.eps);
    let lag_tables: Vec<Vec<(f64, f64)>> = (0..k)
        .map(|d| {
            let col: Vec<f64> = (0..m).map(|i| c.lag_row(i)[d]).collect();
            phase_table(&lag_rules[d], &col)
        })
        .collect();

    let n1 = lag_rules[0].len();
    let n2 = if k == 2 { lag_rules[1].len() } else { 1 };

    let slab = |i1: usize| -> f64 {
        let mut total = 0.0;
        let mut u = vec![(0.0, 0.0); m];
        let mut coef = vec![(0.0, 0.0); m];
        for i2 in 0..n2 {
            let mut lag_w = lag_rules[0].weights[i1];
            let row1 = &lag_tables[0][i1 * m..(i1 + 1) * m];
            u.copy_from_slice(row1);
            if k == 2 {
                lag_w *= lag_rules[1].weights[i2];
                let row2 = &lag_tables[1][i2 * m..(i2 + 1) * m];
                for (z, &(c2, s2)) in u.iter_mut().zip(row2) {
                    *z = (z.0 * c2 - z.1 * s2, z.0 * s2 + z.1 * c2);
                }
            }
            let (mut px, mut py) = (0.0, 0.0);
            for (z, &w) in u.iter().zip(&c.w) {
                px += w * z.0;
                py += w * z.1;
            }
            for ((cf, z), &w) in coef.iter_mut().zip(&u).zip(&c.w) {
                *cf = (w * (z.0 - px), w * (z.1 - py));
            }
            let mut inner = 0.0;
            for (i0, &w0) in rule0.weights.iter().enumerate() {
                let row0 = &table0[i0 * m..(i0 + 1) * m];
                let (mut re, mut im) = (0.0, 0.0);
                for (cf, &(c0, s0)) in coef.iter().zip(row0) {
                    re += cf.0 * c0 - cf.1 * s0;
                    im += cf.0 * s0 + cf.1 * c0;
                }
                inner += w0 * (re * re + im * im);
            }
            total += lag_w * inner;
        }
        total
    };
    let slabs: Vec<f64> = (0..n1).into_par_iter().map(slab).collect();
    let integral = 2.0 * slabs.iter().sum::<f64>();
    Ok(input.n() as f64 * integral)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn equal_weights(n: usize) -> Vec<f64> {
        vec![1.0 / n as f64; n]
    }

    /// n = 5, k = 1, Laplace γ = (1, 1).
    fn fixture() -> StatisticInput {
        StatisticInput::new(
            vec![-1.2, 0.4, 0.9, -0.3, 0.2],
            equal_weights(5),
            vec![vec![0.5, -0.7, 1.1, 0.0, -1.4]],
            WeightSpec::uniform(WeightFamily::Laplace, 1.0, 1).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn two_points_hand_value() {
        // joint − product = ¼(e^{it0 e1} − e^{it0 e2})(e^{it1 x1} − e^{it1 x2}), so
        // T_2 = ½·(F0(0) − F0(Δe))·(F1(0) − F1(Δx))
        for family in [WeightFamily::Laplace, WeightFamily::Gaussian] {
            let w = WeightSpec::new(family, vec![0.8, 1.3]).unwrap();
            let (e, x) = ([0.3, -1.1], [1.5, 0.2]);
            let input = StatisticInput::new(e.to_vec(), equal_weights(2), vec![x.to_vec()], w.clone()).unwrap();
            let hand = 0.5
                * (w.transform(0, 0.0) - w.transform(0, e[0] - e[1]))
                * (w.transform(1, 0.0) - w.transform(1, x[0] - x[1]));
            let closed = statistic_closed_form(&input).unwrap();
            assert!(((closed - hand) / hand).abs() < 1e-13, "{family:?}: {closed} vs {hand}");
            let q = statistic_quadrature(&input, &QuadratureSpec::default()).unwrap();
            assert!(((q - hand) / hand).abs() < 1e-8, "{family:?}: {q} vs {hand}");
        }
    }

    #[test]
    fn two_points_with_equal_lags_give_zero() {
        let input = StatisticInput::new(
            vec![0.3, -1.1],
            equal_weights(2),
            vec![vec![0.4, 0.4]],
            WeightSpec::uniform(WeightFamily::Laplace, 1.0, 1).unwrap(),
        )
        .unwrap();
        assert_eq!(statistic_closed_form(&input).unwrap(), 0.0);
        assert!(statistic_quadrature(&input, &QuadratureSpec::default()).unwrap().abs() < 1e-8);
    }

    #[test]
    fn constant_residuals_give_zero() {
        let input = StatisticInput::new(
            vec![0.7; 6],
            equal_weights(6),
            vec![vec![0.1, -0.4, 2.0, 0.3, -1.0, 0.9]],
            WeightSpec::default_for(1),
        )
        .unwrap();
        assert!(statistic_closed_form(&input).unwrap().abs() < 1e-13);
    }

    #[test]
    fn fixture_matches_oracle() {
        let input = fixture();
        let closed = statistic_closed_form(&input).unwrap();
        let quad = statistic_quadrature(&input, &QuadratureSpec::default()).unwrap();
        assert!(closed > 0.0);
        assert!(((closed - quad) / quad).abs() < 1e-6, "{closed} vs {quad}");
    }

    #[test]
    fn oracle_grid_converged() {
        let input = fixture();
        let spec = QuadratureSpec::default();
        let coarse = statistic_quadrature(&input, &spec).unwrap();
        let fine = statistic_quadrature(&input, &spec.refined()).unwrap();
        assert!((coarse - fine).abs() < 1e-8, "{coarse} vs {fine}");
    }

    #[test]
    fn degenerate_weights_rejected() {
        let mut w = vec![0.0; 4];
        w[2] = 1.0;
        let input =
            StatisticInput::new(vec![1.0, 2.0, 3.0, 4.0], w, vec![vec![0.0; 4]], WeightSpec::default_for(1)).unwrap();
        assert!(matches!(statistic_closed_form(&input), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn input_validation() {
        let w = WeightSpec::default_for(1);
        assert!(StatisticInput::new(vec![1.0, 2.0], vec![0.5, 0.4], vec![vec![0.0, 1.0]], w.clone()).is_err());
        assert!(StatisticInput::new(vec![1.0, 2.0], vec![0.5, 0.5], vec![vec![0.0]], w.clone()).is_err());
        assert!(StatisticInput::new(vec![1.0, 2.0], vec![0.5, 0.5], vec![], w.clone()).is_err());
        assert!(StatisticInput::new(vec![1.0, 2.0], vec![0.5, 0.5], vec![vec![0.0, 1.0]; 2], w).is_err());
        let input = StatisticInput::new(
            vec![1.0, 2.0],
            vec![0.5, 0.5],
            vec![vec![0.0, 1.0]; 3],
            WeightSpec::default_for(3),
        )
        .unwrap();
        assert_eq!(
            statistic_quadrature(&input, &QuadratureSpec::default()),
            Err(Error::UnsupportedDimension(3))
        );
    }

    fn random_input(seed: u64, n: usize, k: usize, family: WeightFamily, dropped: usize) -> StatisticInput {
        let mut rng = SeedStream::new(seed).rng();
        let eps: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let lags: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        let mut w = vec![1.0; n];
        for j in 0..dropped {
            w[j * 3 % n] = 0.0;
        }
        let kept = w.iter().filter(|&&v| v > 0.0).count() as f64;
        w.iter_mut().for_each(|v| *v /= kept);
        let gammas = (0..=k).map(|_| rng.random_range(0.3..1.5)).collect();
        StatisticInput::new(eps, w, lags, WeightSpec::new(family, gammas).unwrap()).unwrap()
    }

    #[test]
    fn tiled_matches_dense() {
        for (i, family) in [WeightFamily::Laplace, WeightFamily::Gaussian].into_iter().enumerate() {
            for k in 1..=3 {
                let input = random_input(10 + i as u64 * 7 + k as u64, 150, k, family, 12);
                let dense = statistic_closed_form(&input).unwrap();
                for tile in [1, 7, 64, 1000] {
                    let tiled = statistic_tiled(&input, tile).unwrap();
                    assert!(((dense - tiled) / dense).abs() < 1e-12, "tile {tile}");
                }
            }
        }
    }

    #[test]
    fn parallel_dense_fill_matches_tiled() {
        let input = random_input(77, PARALLEL_ROWS + 50, 1, WeightFamily::Gaussian, 0);
        let dense = statistic_closed_form(&input).unwrap();
        let tiled = statistic_tiled(&input, 256).unwrap();
        assert!(((dense - tiled) / dense).abs() < 1e-12);
    }

    #[test]
    fn log_space_product_for_many_lags() {
        let input = random_input(5, 40, 10, WeightFamily::Laplace, 0);
        let pt = PairTransform::new(input.weight());
        assert!(pt.log_product);
        let direct = PairTransform {
            log_product: false,
            ..PairTransform::new(input.weight())
        };
        let c = input.compact().unwrap();
        let (_, a) = pt.eval(0.1, c.lag_row(0), c.lag_row(1));
        let (_, b) = direct.eval(0.1, c.lag_row(0), c.lag_row(1));
        assert!(((a - b) / b).abs() < 1e-12);
    }

    #[test]
    fn linear_growth_under_deterministic_dependence() {
        // ε̂_j = sign(X_{j-1})·|Z_j|: T_n/n settles at a positive constant
        let ratio = |n: usize| {
            let reps = 10;
            (0..reps)
                .map(|r| {
                    let mut rng = SeedStream::new(40).child(n as u64).child(r).rng();
                    let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
                    let e: Vec<f64> = x
                        .iter()
                        .map(|v| { let z: f64 = StandardNormal.sample(&mut rng); v.signum() * z.abs() })
                        .collect();
                    let input =
                        StatisticInput::new(e, equal_weights(n), vec![x], WeightSpec::default_for(1)).unwrap();
                    statistic_closed_form(&input).unwrap() / n as f64
                })
                .sum::<f64>()
                / reps as f64
        };
        let (a, b) = (ratio(200), ratio(1600));
        assert!(a > 0.01 && b > 0.01);
        assert!((a / b - 1.0).abs() < 0.25, "{a} vs {b}");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn inputs() -> impl Strategy<Value = StatisticInput> {
            (3usize..25, 1usize..3, any::<bool>(), 0.3f64..2.0).prop_flat_map(|(n, k, laplace, g)| {
                (
                    prop::collection::vec(-3.0f64..3.0, n),
                    prop::collection::vec(prop::collection::vec(-3.0f64..3.0, n), k),
                    prop::collection::vec(0.1f64..1.0, n),
                )
                    .prop_map(move |(e, lags, raw_w)| {
                        let total: f64 = raw_w.iter().sum();
                        let family = if laplace {
                            WeightFamily::Laplace
                        } else {
                            WeightFamily::Gaussian
                        };
                        StatisticInput::new(
                            e,
                            raw_w.iter().map(|w| w / total).collect(),
                            lags,
                            WeightSpec::uniform(family, g, k).unwrap(),
                        )
                        .unwrap()
                    })
            })
        }

        proptest! {
            #[test]
            fn nonnegative(input in inputs()) {
                prop_assert!(statistic_closed_form(&input).unwrap() >= 0.0);
            }

            #[test]
            fn sign_flip_invariance(input in inputs()) {
                let t = statistic_closed_form(&input).unwrap();
                let flipped = StatisticInput::new(
                    input.residuals.iter().map(|v| -v).collect(),
                    input.weights.clone(),
                    input.lags.iter().map(|c| c.iter().map(|v| -v).collect()).collect(),
                    input.weight.clone(),
                ).unwrap();
                let f = statistic_closed_form(&flipped).unwrap();
                prop_assert!((t - f).abs() <= 1e-10 * t.max(1e-12));
            }

            #[test]
            fn permutation_invariance(input in inputs()) {
                let n = input.n();
                let perm: Vec<usize> = (0..n).map(|i| (i * 7 + 3) % n).collect();
                let mut seen = perm.clone();
                seen.sort_unstable();
                seen.dedup();
                prop_assume!(seen.len() == n);
                let pick = |v: &Vec<f64>| perm.iter().map(|&i| v[i]).collect::<Vec<f64>>();
                let permuted = StatisticInput::new(
                    pick(&input.residuals),
                    pick(&input.weights),
                    input.lags.iter().map(pick).collect(),
                    input.weight.clone(),
                ).unwrap();
                let (a, b) = (statistic_closed_form(&input).unwrap(), statistic_closed_form(&permuted).unwrap());
                prop_assert!((a - b).abs() <= 1e-10 * a.max(1e-12));
            }
        }
    }
}
