//! Exact truncated power series.
//!
//! Four series flavours live here: noncommutative Magnus series in `u_1..u_m`,
//! univariate series in `u` or `z`, commutative series in `v_1..v_m`, plus the
//! Laurent and Conway polynomial types. Every coefficient is an exact rational.
//! Arithmetic between series of different truncation degree panics: that is
//! always a caller bug and silently taking the minimum would hide precision loss.

use std::collections::BTreeMap;
use std::fmt;
use std::marker::PhantomData;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::words::Word;

pub type Q = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("series has vanishing linear term and cannot be reverted")]
    NotRevertible,
    #[error("composition needs an inner series with zero constant term")]
    NonzeroConstant,
    #[error("series has zero constant term and is not invertible")]
    NotUnit,
    #[error("not a polynomial in t - t^-1")]
    NotConway,
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

fn q_json(c: &Q) -> (Value, Value) {
    (
        Value::String(c.numer().to_string()),
        Value::String(c.denom().to_string()),
    )
}

fn check_q(a: usize, b: usize) {
    assert_eq!(a, b, "mixing series truncated at different degrees ({a} vs {b})");
}

/// Minimal ring interface used by the generic determinant.
pub trait Ring: Clone {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn negate(&self) -> Self;
    fn is_zero_elem(&self) -> bool;
}

impl Ring for BigInt {
    fn zero_like(&self) -> Self {
        BigInt::zero()
    }
    fn one_like(&self) -> Self {
        BigInt::one()
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negate(&self) -> Self {
        -self
    }
    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }
}

impl Ring for Q {
    fn zero_like(&self) -> Self {
        Q::zero()
    }
    fn one_like(&self) -> Self {
        Q::one()
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negate(&self) -> Self {
        -self
    }
    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }
}

/// Determinant by the division-free Berkowitz recursion.
///
/// Power series rings have non-unit pivots, so nothing here divides.
/// `one` supplies the unit for the empty matrix.
pub fn det<R: Ring>(a: &[Vec<R>], one: &R) -> R {
    let n = a.len();
    if n == 0 {
        return one.clone();
    }
    for row in a {
        assert_eq!(row.len(), n, "determinant of a non-square matrix");
    }
    // characteristic polynomial coefficients of the leading block, highest first
    let mut v = vec![one.clone(), a[0][0].negate()];
    for r in 1..n {
        let mut t = Vec::with_capacity(r + 2);
        t.push(one.clone());
        t.push(a[r][r].negate());
        let mut w: Vec<R> = (0..r).map(|i| a[i][r].clone()).collect();
        for _ in 2..=r + 1 {
            let mut s = one.zero_like();
            for (j, wj) in w.iter().enumerate() {
                s = s.plus(&a[r][j].times(wj));
            }
            t.push(s.negate());
            let nw: Vec<R> = (0..r)
                .map(|i| {
                    let mut s = one.zero_like();
                    for (j, wj) in w.iter().enumerate() {
                        s = s.plus(&a[i][j].times(wj));
                    }
                    s
                })
                .collect();
            w = nw;
        }
        let mut nv = Vec::with_capacity(r + 2);
        for i in 0..r + 2 {
            let mut s = one.zero_like();
            for j in 0..=i.min(r) {
                s = s.plus(&t[i - j].times(&v[j]));
            }
            nv.push(s);
        }
        v = nv;
    }
    if n % 2 == 0 {
        v[n].clone()
    } else {
        v[n].negate()
    }
}

/// Leibniz expansion; exponential, kept as an independent check.
pub fn det_permutation<R: Ring>(a: &[Vec<R>], one: &R) -> R {
    let n = a.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = one.zero_like();
    fn rec<R: Ring>(a: &[Vec<R>], k: usize, perm: &mut Vec<usize>, sign: bool, one: &R, total: &mut R) {
        let n = perm.len();
        if k == n {
            let mut p = one.clone();
            for (i, &j) in perm.iter().enumerate() {
                p = p.times(&a[i][j]);
            }
            *total = if sign { total.minus(&p) } else { total.plus(&p) };
            return;
        }
        for i in k..n {
            perm.swap(k, i);
            rec(a, k + 1, perm, sign ^ (i != k), one, total);
            perm.swap(k, i);
        }
    }
    rec(a, 0, &mut perm, false, one, &mut total);
    total
}

pub trait SeriesVar {
    const NAME: &'static str;
}

/// Marker for the variable `u` (with `t = 1 + u`).
#[derive(Debug)]
pub enum UVar {}
/// Marker for the Conway variable `z`.
#[derive(Debug)]
pub enum ZVar {}

impl SeriesVar for UVar {
    const NAME: &'static str = "u";
}
impl SeriesVar for ZVar {
    const NAME: &'static str = "z";
}

/// Univariate series `c_0 + c_1 x + ... + c_q x^q`.
pub struct Series<V> {
    q: usize,
    c: Vec<Q>,
    _v: PhantomData<fn() -> V>,
}

pub type USeries = Series<UVar>;
pub type ZSeries = Series<ZVar>;

impl<V> Clone for Series<V> {
    fn clone(&self) -> Self {
        Series { q: self.q, c: self.c.clone(), _v: PhantomData }
    }
}

impl<V> PartialEq for Series<V> {
    fn eq(&self, o: &Self) -> bool {
        self.q == o.q && self.c == o.c
    }
}
impl<V> Eq for Series<V> {}

impl<V> fmt::Debug for Series<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Series").field("q", &self.q).field("c", &self.c).finish()
    }
}

impl<V> Series<V> {
    pub fn new(q: usize, mut c: Vec<Q>) -> Self {
        c.resize(q + 1, Q::zero());
        Series { q, c, _v: PhantomData }
    }

    pub fn from_ints(q: usize, c: &[i64]) -> Self {
        Self::new(q, c.iter().map(|&x| qi(x)).collect())
    }

    pub fn zero(q: usize) -> Self {
        Self::new(q, vec![])
    }

    pub fn one(q: usize) -> Self {
        Self::constant(q, Q::one())
    }

    pub fn constant(q: usize, c: Q) -> Self {
        Self::new(q, vec![c])
    }

    /// The series variable itself.
    pub fn var(q: usize) -> Self {
        Self::monomial(q, 1, Q::one())
    }

    pub fn monomial(q: usize, k: usize, c: Q) -> Self {
        let mut s = Self::zero(q);
        if k <= q {
            s.c[k] = c;
        }
        s
    }

    /// `(1 + x)^alpha` by the binomial series.
    pub fn binomial(q: usize, alpha: &Q) -> Self {
        let mut c = Vec::with_capacity(q + 1);
        let mut cur = Q::one();
        for k in 0..=q {
            c.push(cur.clone());
            cur = cur * (alpha - qi(k as i64)) / qi(k as i64 + 1);
        }
        Self::new(q, c)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.c
    }

    pub fn coeff(&self, k: usize) -> Q {
        self.c.get(k).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    /// Index of the first nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.c.iter().position(|x| !x.is_zero())
    }

    pub fn is_integral(&self) -> bool {
        self.c.iter().all(|x| x.is_integer())
    }

    pub fn scale(&self, k: &Q) -> Self {
        Self::new(self.q, self.c.iter().map(|x| x * k).collect())
    }

    /// Multiply by `x^k`.
    pub fn shift(&self, k: usize) -> Self {
        let mut c = vec![Q::zero(); k];
        c.extend(self.c.iter().cloned());
        c.truncate(self.q + 1);
        Self::new(self.q, c)
    }

    /// Same coefficients, reinterpreted at another truncation degree.
    pub fn retruncate(&self, q: usize) -> Self {
        Self::new(q, self.c.iter().take(q + 1).cloned().collect())
    }

    /// Same coefficients in another variable.
    pub fn rename<W>(&self) -> Series<W> {
        Series { q: self.q, c: self.c.clone(), _v: PhantomData }
    }

    pub fn inverse(&self) -> Result<Self, SeriesError> {
        let a0 = &self.c[0];
        if a0.is_zero() {
            return Err(SeriesError::NotUnit);
        }
        let mut b = vec![Q::zero(); self.q + 1];
        b[0] = Q::one() / a0;
        for k in 1..=self.q {
            let mut s = Q::zero();
            for j in 1..=k {
                s += &self.c[j] * &b[k - j];
            }
            b[k] = -s / a0;
        }
        Ok(Self::new(self.q, b))
    }

    /// `self(g(y))`, a series in the variable of `g`.
    pub fn compose<W>(&self, g: &Series<W>) -> Result<Series<W>, SeriesError> {
        check_q(self.q, g.q);
        if !g.c[0].is_zero() {
            return Err(SeriesError::NonzeroConstant);
        }
        let mut r = Series::<W>::constant(g.q, self.c[self.q].clone());
        for k in (0..self.q).rev() {
            r = &(&r * g) + &Series::<W>::constant(g.q, self.c[k].clone());
        }
        Ok(r)
    }

    /// Compositional inverse: `g` with `self(g(x)) = x`.
    pub fn reverse(&self) -> Result<Self, SeriesError> {
        if !self.c[0].is_zero() {
            return Err(SeriesError::NonzeroConstant);
        }
        if self.q == 0 {
            return Ok(Self::zero(0));
        }
        let a1 = self.c[1].clone();
        if a1.is_zero() {
            return Err(SeriesError::NotRevertible);
        }
        let x = Self::var(self.q);
        let inv_a1 = Q::one() / a1;
        let mut g = x.scale(&inv_a1);
        // each pass fixes at least one more coefficient
        for _ in 0..self.q {
            let err = &self.compose(&g)? - &x;
            if err.is_zero() {
                break;
            }
            g = &g - &err.scale(&inv_a1);
        }
        Ok(g)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.c
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(k, c)| {
                    let (n, d) = q_json(c);
                    json!([k, n, d])
                })
                .collect(),
        )
    }
}

fn fmt_q(c: &Q) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

fn fmt_terms<I: Iterator<Item = (Q, String)>>(f: &mut fmt::Formatter<'_>, terms: I) -> fmt::Result {
    let mut first = true;
    for (c, mono) in terms {
        if c.is_zero() {
            continue;
        }
        let neg = c.is_negative();
        let a = c.abs();
        let body = if mono.is_empty() {
            fmt_q(&a)
        } else if a.is_one() {
            mono
        } else {
            format!("{}*{}", fmt_q(&a), mono)
        };
        if first {
            write!(f, "{}{}", if neg { "-" } else { "" }, body)?;
        } else {
            write!(f, " {} {}", if neg { "-" } else { "+" }, body)?;
        }
        first = false;
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

impl<V: SeriesVar> fmt::Display for Series<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_terms(
            f,
            self.c.iter().enumerate().map(|(k, c)| {
                let mono = match k {
                    0 => String::new(),
                    1 => V::NAME.to_string(),
                    _ => format!("{}^{}", V::NAME, k),
                };
                (c.clone(), mono)
            }),
        )?;
        write!(f, " + O({}^{})", V::NAME, self.q + 1)
    }
}

impl<'a, V> Add<&'a Series<V>> for &'a Series<V> {
    type Output = Series<V>;
    fn add(self, o: &Series<V>) -> Series<V> {
        check_q(self.q, o.q);
        Series::new(self.q, self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect())
    }
}

impl<'a, V> Sub<&'a Series<V>> for &'a Series<V> {
    type Output = Series<V>;
    fn sub(self, o: &Series<V>) -> Series<V> {
        check_q(self.q, o.q);
        Series::new(self.q, self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect())
    }
}

impl<'a, V> Mul<&'a Series<V>> for &'a Series<V> {
    type Output = Series<V>;
    fn mul(self, o: &Series<V>) -> Series<V> {
        check_q(self.q, o.q);
        let q = self.q;
        let mut c = vec![Q::zero(); q + 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate().take(q + 1 - i) {
                if !b.is_zero() {
                    c[i + j] += a * b;
                }
            }
        }
        Series::new(q, c)
    }
}

impl<V> Neg for &Series<V> {
    type Output = Series<V>;
    fn neg(self) -> Series<V> {
        Series::new(self.q, self.c.iter().map(|a| -a).collect())
    }
}

impl<V> Ring for Series<V> {
    fn zero_like(&self) -> Self {
        Self::zero(self.q)
    }
    fn one_like(&self) -> Self {
        Self::one(self.q)
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negate(&self) -> Self {
        -self
    }
    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }
}

/// `(1+u)^{1/2}`.
pub fn sqrt1pu(q: usize) -> USeries {
    USeries::binomial(q, &(Q::one() / qi(2)))
}

/// `z(u) = u / sqrt(1+u)`.
pub fn z_of_u(q: usize) -> USeries {
    let s = USeries::binomial(q, &(-Q::one() / qi(2)));
    &USeries::var(q) * &s
}

/// `u(z)`, the solution of `u = z sqrt(1+u)`, by fixed-point iteration.
pub fn u_of_z(q: usize) -> ZSeries {
    let root = ZSeries::binomial(q, &(Q::one() / qi(2)));
    let z = ZSeries::var(q);
    let mut u = ZSeries::zero(q);
    for _ in 0..q {
        let r = root.compose(&u).expect("u has zero constant term");
        u = &z * &r;
    }
    u
}

/// Noncommutative series in `u_1..u_m`, keys are index words (0-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NCSeries {
    m: usize,
    q: usize,
    terms: BTreeMap<Vec<usize>, Q>,
}

impl NCSeries {
    pub fn zero(m: usize, q: usize) -> Self {
        NCSeries { m, q, terms: BTreeMap::new() }
    }

    pub fn one(m: usize, q: usize) -> Self {
        let mut s = Self::zero(m, q);
        s.terms.insert(vec![], Q::one());
        s
    }

    pub fn var(m: usize, q: usize, i: usize) -> Self {
        assert!(i < m, "variable index out of range");
        let mut s = Self::one(m, q);
        if q >= 1 {
            s.terms.insert(vec![i], Q::one());
        }
        s.terms.remove(&vec![]);
        s
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn terms(&self) -> &BTreeMap<Vec<usize>, Q> {
        &self.terms
    }

    pub fn coeff(&self, w: &[usize]) -> Q {
        self.terms.get(w).cloned().unwrap_or_else(Q::zero)
    }

    fn insert_add(&mut self, k: Vec<usize>, v: Q) {
        if v.is_zero() || k.len() > self.q {
            return;
        }
        let e = self.terms.entry(k).or_insert_with(Q::zero);
        *e += v;
        if e.is_zero() {
            // re-borrow to remove
            let key: Vec<usize> = self
                .terms
                .iter()
                .find(|(_, c)| c.is_zero())
                .map(|(k, _)| k.clone())
                .unwrap();
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        check_q(self.q, o.q);
        let mut r = self.clone();
        for (k, v) in &o.terms {
            r.insert_add(k.clone(), v.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        NCSeries {
            m: self.m,
            q: self.q,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), -v)).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        check_q(self.q, o.q);
        let mut acc: BTreeMap<Vec<usize>, Q> = BTreeMap::new();
        for (k1, v1) in &self.terms {
            for (k2, v2) in &o.terms {
                if k1.len() + k2.len() > self.q {
                    continue;
                }
                let mut k = k1.clone();
                k.extend_from_slice(k2);
                *acc.entry(k).or_insert_with(Q::zero) += v1 * v2;
            }
        }
        acc.retain(|_, v| !v.is_zero());
        NCSeries { m: self.m, q: self.q, terms: acc }
    }

    /// Right multiplication by `(1+u_i)^{±1}`, the Magnus image of one letter.
    fn mul_letter(&self, i: usize, e: i8) -> Self {
        let mut acc: BTreeMap<Vec<usize>, Q> = BTreeMap::new();
        for (k, v) in &self.terms {
            *acc.entry(k.clone()).or_insert_with(Q::zero) += v;
            let mut key = k.clone();
            let mut c = v.clone();
            while key.len() < self.q {
                key.push(i);
                if e < 0 {
                    c = -c;
                }
                *acc.entry(key.clone()).or_insert_with(Q::zero) += &c;
                if e > 0 {
                    break;
                }
            }
        }
        acc.retain(|_, v| !v.is_zero());
        NCSeries { m: self.m, q: self.q, terms: acc }
    }

    /// Merge words of equal length: `u_i -> u`.
    pub fn collapse(&self) -> USeries {
        let mut c = vec![Q::zero(); self.q + 1];
        for (k, v) in &self.terms {
            c[k.len()] += v;
        }
        USeries::new(self.q, c)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|(k, c)| {
                    let (n, d) = q_json(c);
                    let word: Vec<usize> = k.iter().map(|i| i + 1).collect();
                    json!([word, n, d])
                })
                .collect(),
        )
    }
}

/// Magnus expansion `x_i -> 1 + u_i` truncated at degree `q`.
pub fn magnus_expand(w: &Word, m: usize, q: usize) -> NCSeries {
    let mut s = NCSeries::one(m, q);
    for &(g, e) in w.letters() {
        assert!(g < m, "generator index out of range");
        s = s.mul_letter(g, e);
    }
    s
}

/// Commutative series in `v_1..v_m`, truncated by total degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiSeries {
    m: usize,
    q: usize,
    terms: BTreeMap<Vec<u32>, Q>,
}

impl MultiSeries {
    pub fn zero(m: usize, q: usize) -> Self {
        MultiSeries { m, q, terms: BTreeMap::new() }
    }

    pub fn constant(m: usize, q: usize, c: Q) -> Self {
        let mut s = Self::zero(m, q);
        if !c.is_zero() {
            s.terms.insert(vec![0; m], c);
        }
        s
    }

    pub fn one(m: usize, q: usize) -> Self {
        Self::constant(m, q, Q::one())
    }

    pub fn var(m: usize, q: usize, i: usize) -> Self {
        assert!(i < m);
        let mut s = Self::zero(m, q);
        if q >= 1 {
            let mut k = vec![0; m];
            k[i] = 1;
            s.terms.insert(k, Q::one());
        }
        s
    }

    /// `t_i^k = (1+v_i)^k` for any integer `k`.
    pub fn t_pow(m: usize, q: usize, i: usize, k: i64) -> Self {
        let b = USeries::binomial(q, &qi(k));
        let mut s = Self::zero(m, q);
        for (d, c) in b.coeffs().iter().enumerate() {
            if !c.is_zero() {
                let mut key = vec![0; m];
                key[i] = d as u32;
                s.terms.insert(key, c.clone());
            }
        }
        s
    }

    /// `prod_j t_j^{e_j}`.
    pub fn t_monomial(m: usize, q: usize, e: &[i64]) -> Self {
        let mut s = Self::one(m, q);
        for (j, &k) in e.iter().enumerate() {
            if k != 0 {
                s = s.mul(&Self::t_pow(m, q, j, k));
            }
        }
        s
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, Q> {
        &self.terms
    }

    pub fn coeff(&self, k: &[u32]) -> Q {
        self.terms.get(k).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        check_q(self.q, o.q);
        let mut t = self.terms.clone();
        for (k, v) in &o.terms {
            *t.entry(k.clone()).or_insert_with(Q::zero) += v;
        }
        t.retain(|_, v| !v.is_zero());
        MultiSeries { m: self.m, q: self.q, terms: t }
    }

    pub fn neg(&self) -> Self {
        MultiSeries {
            m: self.m,
            q: self.q,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), -v)).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &Q) -> Self {
        let mut t: BTreeMap<Vec<u32>, Q> = self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect();
        t.retain(|_, v| !v.is_zero());
        MultiSeries { m: self.m, q: self.q, terms: t }
    }

    pub fn mul(&self, o: &Self) -> Self {
        check_q(self.q, o.q);
        let mut t: BTreeMap<Vec<u32>, Q> = BTreeMap::new();
        for (k1, v1) in &self.terms {
            let d1: u32 = k1.iter().sum();
            for (k2, v2) in &o.terms {
                let d2: u32 = k2.iter().sum();
                if (d1 + d2) as usize > self.q {
                    continue;
                }
                let k: Vec<u32> = k1.iter().zip(k2).map(|(a, b)| a + b).collect();
                *t.entry(k).or_insert_with(Q::zero) += v1 * v2;
            }
        }
        t.retain(|_, v| !v.is_zero());
        MultiSeries { m: self.m, q: self.q, terms: t }
    }

    /// `v_i -> u` for every `i`.
    pub fn specialize(&self) -> USeries {
        let mut c = vec![Q::zero(); self.q + 1];
        for (k, v) in &self.terms {
            let d: u32 = k.iter().sum();
            c[d as usize] += v;
        }
        USeries::new(self.q, c)
    }

    pub fn lowest_degree(&self) -> Option<usize> {
        self.terms.keys().map(|k| k.iter().sum::<u32>() as usize).min()
    }

    pub fn homogeneous(&self, d: usize) -> Self {
        MultiSeries {
            m: self.m,
            q: self.q,
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| k.iter().sum::<u32>() as usize == d)
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    pub fn retruncate(&self, q: usize) -> Self {
        MultiSeries {
            m: self.m,
            q,
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| k.iter().sum::<u32>() as usize <= q)
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|(k, c)| {
                    let (n, d) = q_json(c);
                    json!([k, n, d])
                })
                .collect(),
        )
    }
}

impl fmt::Display for MultiSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut keys: Vec<&Vec<u32>> = self.terms.keys().collect();
        keys.sort_by_key(|k| (k.iter().sum::<u32>(), std::cmp::Reverse((*k).clone())));
        fmt_terms(
            f,
            keys.into_iter().map(|k| {
                let mono: Vec<String> = k
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| if e == 1 { format!("v{}", i + 1) } else { format!("v{}^{}", i + 1, e) })
                    .collect();
                (self.terms[k].clone(), mono.join("*"))
            }),
        )?;
        write!(f, " + O(v^{})", self.q + 1)
    }
}

impl Ring for MultiSeries {
    fn zero_like(&self) -> Self {
        Self::zero(self.m, self.q)
    }
    fn one_like(&self) -> Self {
        Self::one(self.m, self.q)
    }
    fn plus(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn minus(&self, o: &Self) -> Self {
        self.sub(o)
    }
    fn times(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn negate(&self) -> Self {
        self.neg()
    }
    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }
}

/// Integer Laurent polynomial in `t`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    terms: BTreeMap<i64, BigInt>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, BigInt::one())
    }

    pub fn monomial(e: i64, c: BigInt) -> Self {
        let mut p = Self::zero();
        if !c.is_zero() {
            p.terms.insert(e, c);
        }
        p
    }

    pub fn t_pow(e: i64) -> Self {
        Self::monomial(e, BigInt::one())
    }

    pub fn from_pairs(pairs: &[(i64, i64)]) -> Self {
        let mut p = Self::zero();
        for &(e, c) in pairs {
            p = p.plus(&Self::monomial(e, BigInt::from(c)));
        }
        p
    }

    pub fn terms(&self) -> &BTreeMap<i64, BigInt> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn coeff(&self, e: i64) -> BigInt {
        self.terms.get(&e).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        let mut t: BTreeMap<i64, BigInt> = self.terms.iter().map(|(e, v)| (*e, v * c)).collect();
        t.retain(|_, v| !v.is_zero());
        LaurentPoly { terms: t }
    }

    /// Expand at `t = 1 + u`.
    pub fn to_useries(&self, q: usize) -> USeries {
        let mut s = USeries::zero(q);
        for (e, c) in &self.terms {
            let b = USeries::binomial(q, &qi(*e)).scale(&Q::from_integer(c.clone()));
            s = &s + &b;
        }
        s
    }

    /// `t -> t^{-1}`.
    pub fn conjugate(&self) -> Self {
        LaurentPoly { terms: self.terms.iter().map(|(e, c)| (-e, c.clone())).collect() }
    }
}

impl Ring for LaurentPoly {
    fn zero_like(&self) -> Self {
        Self::zero()
    }
    fn one_like(&self) -> Self {
        Self::one()
    }
    fn plus(&self, o: &Self) -> Self {
        let mut t = self.terms.clone();
        for (e, c) in &o.terms {
            *t.entry(*e).or_insert_with(BigInt::zero) += c;
        }
        t.retain(|_, v| !v.is_zero());
        LaurentPoly { terms: t }
    }
    fn minus(&self, o: &Self) -> Self {
        self.plus(&o.negate())
    }
    fn times(&self, o: &Self) -> Self {
        let mut t: BTreeMap<i64, BigInt> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                *t.entry(e1 + e2).or_insert_with(BigInt::zero) += c1 * c2;
            }
        }
        t.retain(|_, v| !v.is_zero());
        LaurentPoly { terms: t }
    }
    fn negate(&self) -> Self {
        LaurentPoly { terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect() }
    }
    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_terms(
            f,
            self.terms.iter().rev().map(|(e, c)| {
                let mono = match *e {
                    0 => String::new(),
                    1 => "t".to_string(),
                    _ => format!("t^{e}"),
                };
                (Q::from_integer(c.clone()), mono)
            }),
        )
    }
}

/// Commutative Laurent polynomial in `t_1..t_m`, keyed by exponent vectors.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MultiLaurent {
    pub terms: BTreeMap<Vec<i64>, BigInt>,
}

impl MultiLaurent {
    pub fn add_term(&mut self, e: Vec<i64>, c: BigInt) {
        let v = self.terms.entry(e.clone()).or_insert_with(BigInt::zero);
        *v += c;
        if v.is_zero() {
            self.terms.remove(&e);
        }
    }

    /// Expand at `t_j = 1 + v_j`.
    pub fn to_multiseries(&self, m: usize, q: usize) -> MultiSeries {
        let mut s = MultiSeries::zero(m, q);
        for (e, c) in &self.terms {
            s = s.add(&MultiSeries::t_monomial(m, q, e).scale(&Q::from_integer(c.clone())));
        }
        s
    }

    /// `t_j -> t`.
    pub fn specialize(&self) -> LaurentPoly {
        let mut p = LaurentPoly::zero();
        for (e, c) in &self.terms {
            p = p.plus(&LaurentPoly::monomial(e.iter().sum(), c.clone()));
        }
        p
    }
}

/// Integer polynomial in `z`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ConwayPoly {
    coeffs: Vec<BigInt>,
}

impl ConwayPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        ConwayPoly { coeffs }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_ints(&[1])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> BigInt {
        self.coeffs.get(k).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    /// Multiply by `z^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = vec![BigInt::zero(); k];
        c.extend(self.coeffs.iter().cloned());
        Self::new(c)
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut c = vec![BigInt::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Self::new(c)
    }

    /// `z -> -z`.
    pub fn mirror(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| if k % 2 == 1 { -c } else { c.clone() })
                .collect(),
        )
    }

    /// Evaluate at `z = t - t^{-1}`.
    pub fn to_laurent(&self) -> LaurentPoly {
        let z = LaurentPoly::from_pairs(&[(1, 1), (-1, -1)]);
        let mut acc = LaurentPoly::zero();
        let mut pw = LaurentPoly::one();
        for c in &self.coeffs {
            acc = acc.plus(&pw.scale(c));
            pw = pw.times(&z);
        }
        acc
    }

    pub fn to_zseries(&self, q: usize) -> ZSeries {
        ZSeries::new(q, self.coeffs.iter().take(q + 1).map(|c| Q::from_integer(c.clone())).collect())
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.coeffs.iter().map(|c| Value::String(c.to_string())).collect())
    }
}

impl fmt::Display for ConwayPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_terms(
            f,
            self.coeffs.iter().enumerate().map(|(k, c)| {
                let mono = match k {
                    0 => String::new(),
                    1 => "z".to_string(),
                    _ => format!("z^{k}"),
                };
                (Q::from_integer(c.clone()), mono)
            }),
        )
    }
}

/// Rewrite `omega(t)` as a polynomial in `z = t - t^{-1}` by leading-term elimination.
pub fn conway_from_laurent(omega: &LaurentPoly) -> Result<ConwayPoly, SeriesError> {
    let z = LaurentPoly::from_pairs(&[(1, 1), (-1, -1)]);
    let mut rest = omega.clone();
    let mut out: Vec<BigInt> = Vec::new();
    while let Some(d) = rest.max_exp() {
        if d < 0 {
            return Err(SeriesError::NotConway);
        }
        let d_us = d as usize;
        let c = rest.coeff(d);
        if out.len() <= d_us {
            out.resize(d_us + 1, BigInt::zero());
        }
        out[d_us] += &c;
        let mut pw = LaurentPoly::one();
        for _ in 0..d {
            pw = pw.times(&z);
        }
        rest = rest.minus(&pw.scale(&c));
        if rest.max_exp() == Some(d) {
            return Err(SeriesError::NotConway);
        }
    }
    Ok(ConwayPoly::new(out))
}

/// Exact integer square root test.
pub fn is_perfect_square(c: &Q) -> bool {
    if !c.is_integer() || c.is_negative() {
        return false;
    }
    let n = c.numer();
    let r = n.sqrt();
    &(&r * &r) == n
}

/// Low-degree rational reconstruction `P/Q` of a truncated series.
///
/// Tries denominators of increasing degree; a candidate is accepted only
/// when it reproduces at least two coefficients beyond those used to fit it.
pub fn rational_guess<V>(s: &Series<V>) -> Option<(Vec<Q>, Vec<Q>)> {
    let q = s.q();
    let c = s.coeffs();
    for total in 0..q.saturating_sub(1) {
        for dq in 0..=total {
            let dp = total - dq;
            if dp + dq + 2 > q {
                continue;
            }
            if let Some((p, den)) = pade(c, dp, dq) {
                let den_s = Series::<V>::new(q, den.clone());
                let num_s = Series::<V>::new(q, p.clone());
                if let Ok(inv) = den_s.inverse() {
                    if &(&num_s * &inv) == s {
                        return Some((p, den));
                    }
                }
            }
        }
    }
    None
}

fn pade(c: &[Q], dp: usize, dq: usize) -> Option<(Vec<Q>, Vec<Q>)> {
    let get = |k: i64| -> Q {
        if k < 0 {
            Q::zero()
        } else {
            c.get(k as usize).cloned().unwrap_or_else(Q::zero)
        }
    };
    // denominator b_0 = 1; solve sum_{j=0..dq} b_j c_{k-j} = 0 for k = dp+1..dp+dq
    let n = dq;
    let mut a: Vec<Vec<Q>> = (0..n)
        .map(|r| {
            let k = (dp + 1 + r) as i64;
            let mut row: Vec<Q> = (1..=n).map(|j| get(k - j as i64)).collect();
            row.push(-get(k));
            row
        })
        .collect();
    let mut b = vec![Q::zero(); n];
    // Gauss-Jordan over Q
    let mut piv_row = 0;
    let mut pivots = vec![usize::MAX; n];
    for col in 0..n {
        let Some(p) = (piv_row..n).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(piv_row, p);
        let inv = Q::one() / &a[piv_row][col];
        for x in a[piv_row].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..n {
            if r != piv_row && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pr = a[piv_row].clone();
                for (x, y) in a[r].iter_mut().zip(pr.iter()) {
                    *x = &*x - &(&f * y);
                }
            }
        }
        pivots[col] = piv_row;
        piv_row += 1;
    }
    for r in piv_row..n {
        if !a[r][n].is_zero() {
            return None;
        }
    }
    for col in 0..n {
        if pivots[col] != usize::MAX {
            b[col] = a[pivots[col]][n].clone();
        }
    }
    let mut den = vec![Q::one()];
    den.extend(b);
    let p: Vec<Q> = (0..=dp)
        .map(|k| {
            let mut s = Q::zero();
            for (j, bj) in den.iter().enumerate() {
                if j <= k {
                    s += bj * get((k - j) as i64);
                }
            }
            s
        })
        .collect();
    Some((p, den))
}

/// Render `P/Q` in the variable `x`.
pub fn format_rational(p: &[Q], d: &[Q], x: &str) -> String {
    struct P<'a>(&'a [Q], &'a str);
    impl fmt::Display for P<'_> {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            fmt_terms(
                f,
                self.0.iter().enumerate().map(|(k, c)| {
                    let mono = match k {
                        0 => String::new(),
                        1 => self.1.to_string(),
                        _ => format!("{}^{}", self.1, k),
                    };
                    (c.clone(), mono)
                }),
            )
        }
    }
    let num = P(p, x).to_string();
    if d.len() == 1 && d[0].is_one() {
        num
    } else {
        format!("({})/({})", num, P(d, x))
    }
}

pub fn q_to_i64(c: &Q) -> Option<i64> {
    if c.is_integer() {
        c.numer().to_i64()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Q {
        Q::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn sqrt_coefficients() {
        let s = sqrt1pu(4);
        assert_eq!(s.coeffs(), &[qi(1), r(1, 2), r(-1, 8), r(1, 16), r(-5, 128)]);
        assert_eq!(&s * &s, USeries::from_ints(4, &[1, 1]));
    }

    #[test]
    fn u_of_z_leading_terms() {
        let u = u_of_z(3);
        assert_eq!(u.coeffs(), &[qi(0), qi(1), r(1, 2), r(1, 8)]);
    }

    #[test]
    fn u_z_inverse_pair() {
        let q = 10;
        let u = u_of_z(q);
        let z = z_of_u(q);
        assert_eq!(z.compose(&u).unwrap(), ZSeries::var(q));
        assert_eq!(u.compose(&z).unwrap(), USeries::var(q));
        assert_eq!(z.reverse().unwrap().rename::<ZVar>(), u);
    }

    #[test]
    #[should_panic(expected = "different degrees")]
    fn mixing_truncations_panics() {
        let _ = &USeries::one(3) + &USeries::one(4);
    }

    #[test]
    fn magnus_commutator() {
        let w = Word::parse("X1 X2 X1^-1 X2^-1").unwrap();
        let s = magnus_expand(&w, 2, 2);
        let mut expect = NCSeries::one(2, 2);
        expect = expect.add(&NCSeries::var(2, 2, 0).mul(&NCSeries::var(2, 2, 1)));
        expect = expect.sub(&NCSeries::var(2, 2, 1).mul(&NCSeries::var(2, 2, 0)));
        assert_eq!(s, expect);
        assert_eq!(magnus_expand(&Word::parse("X1").unwrap(), 2, 3), NCSeries::one(2, 3).add(&NCSeries::var(2, 3, 0)));
    }

    #[test]
    fn collapse_examples() {
        let s = NCSeries::one(2, 2).add(&NCSeries::var(2, 2, 0)).add(&NCSeries::var(2, 2, 1));
        assert_eq!(s.collapse(), USeries::from_ints(2, &[1, 2]));
        let w = Word::parse("X1^-1 X2").unwrap();
        assert_eq!(magnus_expand(&w, 2, 4).collapse().coeff(1), qi(0));
    }

    #[test]
    fn conway_from_laurent_examples() {
        let z = LaurentPoly::from_pairs(&[(1, 1), (-1, -1)]);
        assert_eq!(conway_from_laurent(&z).unwrap(), ConwayPoly::from_ints(&[0, 1]));
        let p = LaurentPoly::from_pairs(&[(2, 1), (0, -1), (-2, 1)]);
        assert_eq!(conway_from_laurent(&p).unwrap(), ConwayPoly::from_ints(&[1, 0, 1]));
        assert_eq!(conway_from_laurent(&LaurentPoly::one()).unwrap(), ConwayPoly::one());
        assert_eq!(conway_from_laurent(&LaurentPoly::t_pow(1)), Err(SeriesError::NotConway));
        assert_eq!(conway_from_laurent(&LaurentPoly::t_pow(-2)), Err(SeriesError::NotConway));
    }

    #[test]
    fn berkowitz_matches_leibniz() {
        let a: Vec<Vec<BigInt>> = vec![
            vec![2.into(), (-1).into(), 3.into(), 0.into()],
            vec![1.into(), 4.into(), (-2).into(), 5.into()],
            vec![0.into(), 7.into(), 1.into(), (-3).into()],
            vec![6.into(), 1.into(), 1.into(), 2.into()],
        ];
        assert_eq!(det(&a, &BigInt::one()), det_permutation(&a, &BigInt::one()));
        let e: Vec<Vec<BigInt>> = vec![];
        assert_eq!(det(&e, &BigInt::one()), BigInt::one());
    }

    #[test]
    fn reverse_needs_linear_term() {
        assert_eq!(USeries::monomial(4, 2, qi(1)).reverse(), Err(SeriesError::NotRevertible));
    }

    #[test]
    fn pade_recovers_geometric() {
        // -u/(1+u)
        let s = USeries::new(8, (0..=8).map(|k| if k == 0 { qi(0) } else { qi(if k % 2 == 1 { -1 } else { 1 }) }).collect());
        let (p, d) = rational_guess(&s).unwrap();
        assert_eq!(format_rational(&p, &d, "u"), "(-u)/(1 + u)");
    }

    #[test]
    fn squares() {
        assert!(is_perfect_square(&qi(0)));
        assert!(is_perfect_square(&qi(49)));
        assert!(!is_perfect_square(&qi(-4)));
        assert!(!is_perfect_square(&r(1, 4)));
        assert!(!is_perfect_square(&qi(8)));
    }
}
