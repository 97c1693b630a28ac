#![allow(dead_code)]

//! Test-only oracles. Nothing in here calls into the library's numerical
//! kernels; each routine is an independent second route to the same number.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact OLS via rational normal equations.
pub struct OracleFit {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub p_values: Vec<f64>,
    pub residual_df: u32,
}

fn rat(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite input")
}

/// Gauss-Jordan inverse over the rationals. `None` when singular.
fn invert(mut a: Vec<Vec<BigRational>>) -> Option<Vec<Vec<BigRational>>> {
    let m = a.len();
    let mut inv: Vec<Vec<BigRational>> = (0..m)
        .map(|i| (0..m).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect())
        .collect();
    for col in 0..m {
        let pivot = (col..m).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for j in 0..m {
            a[col][j] = &a[col][j] / &p;
            inv[col][j] = &inv[col][j] / &p;
        }
        for r in 0..m {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in 0..m {
                    let da = &f * &a[col][j];
                    let di = &f * &inv[col][j];
                    a[r][j] = &a[r][j] - da;
                    inv[r][j] = &inv[r][j] - di;
                }
            }
        }
    }
    Some(inv)
}

/// `rows[i]` holds the k regressors of observation i (intercept added here).
pub fn exact_ols(rows: &[Vec<f64>], y: &[f64]) -> Option<OracleFit> {
    let n = rows.len();
    let k = rows.first().map_or(0, |r| r.len());
    let m = k + 1;
    let aug: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| std::iter::once(BigRational::one()).chain(r.iter().map(|&v| rat(v))).collect())
        .collect();
    let yr: Vec<BigRational> = y.iter().map(|&v| rat(v)).collect();

    let mut xtx = vec![vec![BigRational::zero(); m]; m];
    let mut xty = vec![BigRational::zero(); m];
    for i in 0..n {
        for a in 0..m {
            xty[a] = &xty[a] + &aug[i][a] * &yr[i];
            for b in 0..m {
                xtx[a][b] = &xtx[a][b] + &aug[i][a] * &aug[i][b];
            }
        }
    }
    let inv = invert(xtx)?;
    let beta: Vec<BigRational> = (0..m)
        .map(|a| (0..m).fold(BigRational::zero(), |acc, b| acc + &inv[a][b] * &xty[b]))
        .collect();
    let mut rss = BigRational::zero();
    for i in 0..n {
        let fitted = (0..m).fold(BigRational::zero(), |acc, a| acc + &aug[i][a] * &beta[a]);
        let r = &yr[i] - fitted;
        rss += &r * &r;
    }
    let df = (n - m) as u32;
    let sigma2 = rss / BigRational::from_integer(BigInt::from(df));

    let mut coefficients = Vec::new();
    let mut std_errors = Vec::new();
    let mut t_stats = Vec::new();
    let mut p_values = Vec::new();
    for j in 1..m {
        let var = (&sigma2 * &inv[j][j]).to_f64().unwrap();
        let se = var.sqrt();
        // t from the exact ratio to keep the oracle's own rounding minimal.
        let t = if se > 0.0 {
            let t2 = (&beta[j] * &beta[j] / (&sigma2 * &inv[j][j])).to_f64().unwrap();
            t2.sqrt() * if beta[j].is_negative() { -1.0 } else { 1.0 }
        } else {
            f64::INFINITY
        };
        coefficients.push(beta[j].to_f64().unwrap());
        std_errors.push(se);
        t_stats.push(t);
        p_values.push(t_two_sided_p(t.abs(), df));
    }
    Some(OracleFit {
        intercept: beta[0].to_f64().unwrap(),
        coefficients,
        std_errors,
        t_stats,
        p_values,
        residual_df: df,
    })
}

/// Gamma(nu/2) for positive integer nu, from the closed forms at integers
/// and half-integers.
fn half_gamma(nu: u32) -> f64 {
    if nu.is_multiple_of(2) {
        (1..nu / 2).map(|i| i as f64).product()
    } else {
        // Gamma(m + 1/2) = (2m)! / (4^m m!) sqrt(pi)
        let m = (nu - 1) / 2;
        let mut g = std::f64::consts::PI.sqrt();
        for i in 0..m {
            g *= i as f64 + 0.5;
        }
        g
    }
}

pub fn t_density(x: f64, nu: u32) -> f64 {
    let v = nu as f64;
    let c = half_gamma(nu + 1) / ((v * std::f64::consts::PI).sqrt() * half_gamma(nu));
    c * (1.0 + x * x / v).powf(-(v + 1.0) / 2.0)
}

#[allow(clippy::too_many_arguments)]
fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, eps: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
}

/// Adaptive Simpson over [a, b], split into `pieces` panels first.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, eps: f64) -> f64 {
    let pieces = 64;
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let lo = a + i as f64 * h;
            let hi = lo + h;
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = h / 6.0 * (fa + 4.0 * fm + fb);
            simpson(&f, lo, hi, fa, fm, fb, whole, eps / pieces as f64, 40)
        })
        .sum()
}

/// Two-sided Student-t p-value by quadrature of the density.
pub fn t_two_sided_p(t_abs: f64, nu: u32) -> f64 {
    if t_abs == 0.0 {
        return 1.0;
    }
    if t_abs.is_infinite() {
        return 0.0;
    }
    if t_abs <= 1.0 {
        let body = integrate(|x| t_density(x, nu), 0.0, t_abs, 1e-15);
        return 1.0 - 2.0 * body;
    }
    // Tail integral with x = t / s, s in (0, 1].
    let v = nu as f64;
    let c = half_gamma(nu + 1) / ((v * std::f64::consts::PI).sqrt() * half_gamma(nu));
    let tail_scale = t_density(t_abs, nu) * t_abs;
    let g = |s: f64| {
        if s == 0.0 {
            // limit of f(t/s) t / s^2 as s -> 0
            if nu == 1 {
                c * v.powf((v + 1.0) / 2.0) * t_abs.powf(-v)
            } else {
                0.0
            }
        } else {
            t_density(t_abs / s, nu) * t_abs / (s * s)
        }
    };
    2.0 * integrate(g, 0.0, 1.0, 1e-13 * tail_scale)
}

/// Relative difference with an absolute floor for values at zero.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / b.abs().max(1e-300)
}

use chrono::{Duration, TimeZone, Utc};
use sentrade_core::sessions::{compute_returns, Session, SessionKind, SessionSeries};

/// Series with the given returns and counts; 12-hour sessions, prices chained from 100.
pub fn series_from(returns: &[f64], counts: &[(u64, u64, u64)]) -> SessionSeries {
    assert_eq!(returns.len(), counts.len());
    let base = Utc.with_ymd_and_hms(2012, 3, 5, 14, 0, 0).unwrap();
    let mut price = 100.0;
    let sessions = returns
        .iter()
        .zip(counts)
        .enumerate()
        .map(|(i, (&r, &(pos, neg, neu)))| {
            let open = price;
            price = open * (1.0 + r);
            Session {
                index: i,
                kind: if i % 2 == 0 { SessionKind::Day } else { SessionKind::Night },
                open_time: base + Duration::hours(12 * i as i64),
                close_time: base + Duration::hours(12 * (i as i64 + 1)),
                open_price: open,
                close_price: price,
                pos,
                neg,
                neu,
            }
        })
        .collect();
    compute_returns("test", sessions).unwrap()
}

/// Independent restatement of the spread and quality recursions, one step at
/// a time, from raw `(is_sentiment, predicted)` votes.
pub mod recursions {
    fn sign(x: f64) -> i32 {
        if x > 0.0 {
            1
        } else if x < 0.0 {
            -1
        } else {
            0
        }
    }

    /// (models, correct, majority sign or 0) for one class.
    pub fn tally(votes: &[(bool, f64)], sentiment: bool, realized: f64) -> (usize, usize, i32) {
        let mine: Vec<f64> = votes.iter().filter(|v| v.0 == sentiment).map(|v| v.1).collect();
        let correct = mine.iter().filter(|&&p| sign(realized) != 0 && sign(p) == sign(realized)).count();
        let up = mine.iter().filter(|&&p| p > 0.0).count();
        let down = mine.iter().filter(|&&p| p < 0.0).count();
        let majority = if 2 * up > mine.len() {
            1
        } else if 2 * down > mine.len() {
            -1
        } else {
            0
        };
        (mine.len(), correct, majority)
    }

    pub fn spread(gamma: f64, s: f64, votes: &[(bool, f64)], realized: f64) -> f64 {
        let (nf, cf, _) = tally(votes, false, realized);
        let (ns, cs, _) = tally(votes, true, realized);
        let mag = (100.0 * realized).abs();
        match (nf, ns) {
            (0, 0) => gamma * s,
            (_, 0) => gamma * s + mag,
            (0, _) => gamma * s - mag,
            _ => {
                // cf/nf >= cs/ns without division.
                if cf * ns >= cs * nf {
                    gamma * s + mag
                } else {
                    gamma * s - mag
                }
            }
        }
    }

    /// Emitted sign (or 0) of an engine holding spread `s`.
    pub fn emission(s: f64, votes: &[(bool, f64)]) -> i32 {
        tally(votes, s < 0.0, f64::NAN).2
    }

    pub fn quality(beta: f64, q: f64, emitted: i32, realized: f64) -> f64 {
        let lambda = match emitted {
            0 => 0.0,
            e if e == sign(realized) => 1.0,
            _ => -1.0,
        };
        beta * q + lambda * (100.0 * realized).abs()
    }
}

/// Random vote streams for exercising engines without fitting anything.
pub mod histories {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use sentrade_core::adaptive::{EngineParams, SpreadMode, TfwEngine};
    use sentrade_core::model_space::{ModelClass, ModelVote};

    use super::recursions;

    pub struct History {
        pub params: EngineParams,
        /// `None` marks an infeasible session.
        pub votes: Vec<Option<Vec<(bool, f64)>>>,
        pub realized: Vec<f64>,
    }

    pub fn random(seed: u64, len: usize) -> History {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = EngineParams {
            beta: rng.random_range(0.0..=1.0),
            gamma: rng.random_range(0.0..=1.0),
            initial_spread: rng.random_range(-2.0..2.0),
            initial_quality: rng.random_range(-2.0..2.0),
        };
        let mut votes = Vec::with_capacity(len);
        let mut realized = Vec::with_capacity(len);
        for _ in 0..len {
            votes.push(if rng.random_bool(0.1) {
                None
            } else {
                let n = rng.random_range(0..8);
                Some((0..n).map(|_| (rng.random_bool(0.6), rng.random_range(-0.02..0.02))).collect())
            });
            realized.push(if rng.random_bool(0.05) { 0.0 } else { rng.random_range(-0.05..0.05) });
        }
        History { params, votes, realized }
    }

    pub fn to_votes(v: &[(bool, f64)]) -> Vec<ModelVote> {
        v.iter()
            .map(|&(sent, p)| ModelVote { class: if sent { ModelClass::Sentiment } else { ModelClass::Financial }, predicted: p })
            .collect()
    }

    pub fn run(h: &History, w: usize, start: usize) -> TfwEngine {
        let mut engine = TfwEngine::new(w, h.params);
        for (i, (v, &r)) in h.votes.iter().zip(&h.realized).enumerate() {
            let v = v.as_ref().map(|v| to_votes(v));
            engine.advance(start + i, v.as_deref(), r, SpreadMode::Own);
        }
        engine
    }

    /// Largest absolute difference between stored and recomputed spread and
    /// quality, plus the number of emission mismatches.
    pub fn replay(engine: &TfwEngine, h: &History) -> (f64, usize) {
        let (mut s, mut q) = (h.params.initial_spread, h.params.initial_quality);
        let (mut err, mut mismatches) = (0.0f64, 0usize);
        for (rec, (v, &r)) in engine.history().iter().zip(h.votes.iter().zip(&h.realized)) {
            err = err.max((rec.spread_before - s).abs()).max((rec.quality_before - q).abs());
            let emitted = match v {
                Some(v) => {
                    let e = recursions::emission(s, v);
                    s = recursions::spread(h.params.gamma, s, v, r);
                    e
                }
                None => 0,
            };
            q = recursions::quality(h.params.beta, q, emitted, r);
            let stored = rec.emitted.map_or(0, |d| d.value() as i32);
            mismatches += usize::from(stored != emitted);
            err = err.max((rec.spread_after - s).abs()).max((rec.quality_after - q).abs());
        }
        (err, mismatches)
    }
}
