//! Truncated power series in `x`, finitely many times `t_1, …, t_T` and `eps`.
//!
//! The grading is the total weight `deg_x + Σ deg_{t_i} + deg_eps`. A flow in
//! `Â_{u;1}` maps weight `w` data to weight `w` after one time integration,
//! which is what makes Picard iteration exact under this truncation.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed};

use crate::ring::DiffPoly;
use crate::scalar::{fmt_rational, int, param_factors, ParamScalar, Rational};

/// `x^x · Π t_i^{t[i]} · eps^eps`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SeriesMono {
    pub eps: u32,
    pub x: u32,
    pub t: Vec<u32>,
}

impl SeriesMono {
    pub fn new(x: u32, t: Vec<u32>, eps: u32) -> Self {
        SeriesMono { eps, x, t }
    }

    pub fn weight(&self) -> u32 {
        self.x + self.t.iter().sum::<u32>() + self.eps
    }

    fn mul(&self, other: &SeriesMono) -> SeriesMono {
        SeriesMono {
            eps: self.eps + other.eps,
            x: self.x + other.x,
            t: self.t.iter().zip(&other.t).map(|(a, b)| a + b).collect(),
        }
    }

    fn time_degree(&self) -> u32 {
        self.t.iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Series {
    n_times: usize,
    weight_max: u32,
    terms: BTreeMap<SeriesMono, ParamScalar>,
}

impl Series {
    pub fn zero(n_times: usize, weight_max: u32) -> Self {
        Series {
            n_times,
            weight_max,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms(
        n_times: usize,
        weight_max: u32,
        terms: impl IntoIterator<Item = (SeriesMono, ParamScalar)>,
    ) -> Self {
        let mut s = Series::zero(n_times, weight_max);
        for (m, c) in terms {
            assert_eq!(m.t.len(), n_times, "time count mismatch");
            s.add_term(m, c);
        }
        s
    }

    pub fn constant(n_times: usize, weight_max: u32, c: ParamScalar) -> Self {
        Series::from_terms(n_times, weight_max, [(SeriesMono::new(0, vec![0; n_times], 0), c)])
    }

    pub fn one(n_times: usize, weight_max: u32) -> Self {
        Series::constant(n_times, weight_max, ParamScalar::one())
    }

    pub fn x(n_times: usize, weight_max: u32) -> Self {
        Series::from_terms(n_times, weight_max, [(SeriesMono::new(1, vec![0; n_times], 0), ParamScalar::one())])
    }

    pub fn t(n_times: usize, weight_max: u32, i: usize) -> Self {
        let mut t = vec![0; n_times];
        t[i] = 1;
        Series::from_terms(n_times, weight_max, [(SeriesMono::new(0, t, 0), ParamScalar::one())])
    }

    pub fn eps(n_times: usize, weight_max: u32) -> Self {
        Series::from_terms(n_times, weight_max, [(SeriesMono::new(0, vec![0; n_times], 1), ParamScalar::one())])
    }

    fn add_term(&mut self, m: SeriesMono, c: ParamScalar) {
        if m.weight() > self.weight_max || c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m.clone()).or_insert_with(ParamScalar::zero);
        *entry += &c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn n_times(&self) -> usize {
        self.n_times
    }

    pub fn weight_max(&self) -> u32 {
        self.weight_max
    }

    pub fn terms(&self) -> impl Iterator<Item = (&SeriesMono, &ParamScalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &SeriesMono) -> ParamScalar {
        self.terms.get(m).cloned().unwrap_or_else(ParamScalar::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant_term(&self) -> ParamScalar {
        self.coeff(&SeriesMono::new(0, vec![0; self.n_times], 0))
    }

    /// Keeps terms of weight `≤ w`.
    pub fn truncated(&self, w: u32) -> Series {
        let w = w.min(self.weight_max);
        Series::from_terms(
            self.n_times,
            w,
            self.terms.iter().filter(|(m, _)| m.weight() <= w).map(|(m, c)| (m.clone(), c.clone())),
        )
    }

    /// Appends time variables absent from every term.
    pub fn with_times(&self, n_times: usize) -> Series {
        assert!(n_times >= self.n_times);
        Series::from_terms(
            n_times,
            self.weight_max,
            self.terms.iter().map(|(m, c)| {
                let mut t = m.t.clone();
                t.resize(n_times, 0);
                (SeriesMono::new(m.x, t, m.eps), c.clone())
            }),
        )
    }

    pub fn scalar_mul(&self, s: &ParamScalar) -> Series {
        Series::from_terms(self.n_times, self.weight_max, self.terms.iter().map(|(m, c)| (m.clone(), c * s)))
    }

    pub fn scale(&self, q: &Rational) -> Series {
        self.scalar_mul(&ParamScalar::from_rational(q.clone()))
    }

    pub fn pow(&self, k: u32) -> Series {
        let mut acc = Series::one(self.n_times, self.weight_max);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn dx(&self) -> Series {
        let w = self.weight_max.saturating_sub(1);
        Series::from_terms(
            self.n_times,
            w,
            self.terms.iter().filter(|(m, _)| m.x > 0).map(|(m, c)| {
                (SeriesMono::new(m.x - 1, m.t.clone(), m.eps), c.scale(&int(m.x as i64)))
            }),
        )
    }

    pub fn dt(&self, i: usize) -> Series {
        let w = self.weight_max.saturating_sub(1);
        Series::from_terms(
            self.n_times,
            w,
            self.terms.iter().filter(|(m, _)| m.t[i] > 0).map(|(m, c)| {
                let mut t = m.t.clone();
                t[i] -= 1;
                (SeriesMono::new(m.x, t, m.eps), c.scale(&int(m.t[i] as i64)))
            }),
        )
    }

    /// `∫_0^x`, raising the weight bound by one.
    pub fn integrate_x(&self) -> Series {
        Series::from_terms(
            self.n_times,
            self.weight_max + 1,
            self.terms.iter().map(|(m, c)| {
                (SeriesMono::new(m.x + 1, m.t.clone(), m.eps), c.scale(&(int(1) / int(m.x as i64 + 1))))
            }),
        )
    }

    /// `∫_0^{t_i}`, raising the weight bound by one.
    pub fn integrate_t(&self, i: usize) -> Series {
        Series::from_terms(
            self.n_times,
            self.weight_max + 1,
            self.terms.iter().map(|(m, c)| {
                let mut t = m.t.clone();
                t[i] += 1;
                let k = t[i] as i64;
                (SeriesMono::new(m.x, t, m.eps), c.scale(&(int(1) / int(k))))
            }),
        )
    }

    /// Sets `t_i = 0`.
    pub fn at_time_zero(&self, i: usize) -> Series {
        Series::from_terms(
            self.n_times,
            self.weight_max,
            self.terms.iter().filter(|(m, _)| m.t[i] == 0).map(|(m, c)| (m.clone(), c.clone())),
        )
    }

    /// Sets `x = 0`.
    pub fn at_x_zero(&self) -> Series {
        Series::from_terms(
            self.n_times,
            self.weight_max,
            self.terms.iter().filter(|(m, _)| m.x == 0).map(|(m, c)| (m.clone(), c.clone())),
        )
    }

    /// Substitutes `x ↦ big_x`, where `big_x` has no constant term.
    pub fn compose_x(&self, big_x: &Series) -> Series {
        assert!(big_x.constant_term().is_zero(), "substituted series must vanish at the origin");
        let w = self.weight_max.min(big_x.weight_max);
        let max_x = self.terms.keys().map(|m| m.x).max().unwrap_or(0);
        let mut powers = vec![Series::one(self.n_times, w)];
        for k in 0..max_x as usize {
            let next = &powers[k] * big_x;
            powers.push(next);
        }
        let mut out = Series::zero(self.n_times, w);
        for (m, c) in &self.terms {
            let rest = Series::from_terms(
                self.n_times,
                w,
                [(SeriesMono::new(0, m.t.clone(), m.eps), c.clone())],
            );
            out = &out + &(&rest * &powers[m.x as usize]);
        }
        out
    }

    /// Substitutes `u^α_k ↦ ∂_x^k u^α` and `eps ↦ eps` in `p`.
    ///
    /// The derivatives keep the nominal weight bound of `u`, so only weights
    /// up to `W − d` are exact when `p` has differential degree `d` and the
    /// `u`-degree bound of `p` exceeds `W`.
    pub fn eval_diffpoly(p: &DiffPoly, u: &[Series]) -> Series {
        assert_eq!(p.n_vars(), u.len());
        let n_times = u[0].n_times;
        let w = u.iter().map(|s| s.weight_max).min().unwrap_or(0);
        let mut derivs: Vec<Vec<Series>> = u.iter().map(|s| vec![s.clone()]).collect();
        let mut out = Series::zero(n_times, w);
        for (m, c) in p.terms() {
            if m.eps() < 0 || m.eps() as u32 > w {
                continue;
            }
            let mut acc = Series::from_terms(
                n_times,
                w,
                [(SeriesMono::new(0, vec![0; n_times], m.eps() as u32), c.clone())],
            );
            for &(j, mult) in m.jets() {
                let chain = &mut derivs[j.var as usize];
                while chain.len() <= j.order as usize {
                    let next = chain.last().unwrap().dx().with_weight_max(w);
                    chain.push(next);
                }
                acc = &acc * &chain[j.order as usize].pow(mult as u32);
                if acc.is_zero() {
                    break;
                }
            }
            out = &out + &acc;
        }
        out
    }

    /// Changes the recorded bound without touching terms of weight `≤ w`.
    ///
    /// Raising the bound is only meaningful when the caller knows the series
    /// is exact there (e.g. a derivative of exact data in a lower bound).
    pub(crate) fn with_weight_max(&self, w: u32) -> Series {
        let mut s = self.truncated(w);
        s.weight_max = w;
        s
    }

    /// Smallest weight with a nonzero coefficient.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(SeriesMono::weight).min()
    }

    pub fn max_time_degree(&self) -> u32 {
        self.terms.keys().map(SeriesMono::time_degree).max().unwrap_or(0)
    }
}

impl Add for &Series {
    type Output = Series;
    fn add(self, rhs: &Series) -> Series {
        assert_eq!(self.n_times, rhs.n_times);
        let mut out = self.truncated(self.weight_max.min(rhs.weight_max));
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Series {
    type Output = Series;
    fn sub(self, rhs: &Series) -> Series {
        self + &(-rhs)
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        Series::from_terms(self.n_times, self.weight_max, self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())))
    }
}

impl Mul for &Series {
    type Output = Series;
    fn mul(self, rhs: &Series) -> Series {
        assert_eq!(self.n_times, rhs.n_times);
        let w = self.weight_max.min(rhs.weight_max);
        let mut out = Series::zero(self.n_times, w);
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                if a.weight() + b.weight() <= w {
                    out.add_term(a.mul(b), ca * cb);
                }
            }
        }
        out
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        let mut ordered: Vec<_> = self.terms.iter().collect();
        ordered.sort_by_key(|(m, _)| (m.weight(), std::cmp::Reverse(m.x)));
        for (m, c) in ordered {
            let mut factors = Vec::new();
            if m.x > 0 {
                factors.push(if m.x == 1 { "x".to_string() } else { format!("x^{}", m.x) });
            }
            for (i, &e) in m.t.iter().enumerate() {
                if e > 0 {
                    factors.push(if e == 1 { format!("t{}", i + 1) } else { format!("t{}^{}", i + 1, e) });
                }
            }
            if m.eps > 0 {
                factors.push(if m.eps == 1 { "eps".to_string() } else { format!("eps^{}", m.eps) });
            }
            for (pm, q) in c.terms() {
                let neg = q.is_negative();
                if first {
                    write!(f, "{}", if neg { "-" } else { "" })?;
                } else {
                    write!(f, "{}", if neg { " - " } else { " + " })?;
                }
                first = false;
                let a = q.abs();
                let mut all = Vec::new();
                let params = param_factors(pm);
                if !a.is_one() || (params.is_empty() && factors.is_empty()) {
                    all.push(fmt_rational(&a));
                }
                all.extend(params);
                all.extend(factors.iter().cloned());
                write!(f, "{}", all.join("*"))?;
            }
        }
        Ok(())
    }
}
