//! Forward-mode automatic differentiation on truncated Taylor jets.
//!
//! A [`Jet`] carries a value together with exact mixed partial derivatives,
//! up to total degree 3, with respect to at most 8 seeded directions. The
//! coefficient field is any [`Scalar`], so jets nest: `Jet<Jet<f64>>` yields
//! derivatives of derivative-extracting programs. Storage is dense over
//! graded-lexicographic multi-indices; mixed partials occupy a single slot,
//! so `d²/da db` and `d²/db da` are the same number by construction.

use crate::error::{DomainError, FrError, Result};
use crate::scalar::{powi_by_squaring, Scalar};
use std::collections::HashMap;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Mutex, OnceLock};

pub const MAX_DIRS: usize = 8;
pub const MAX_ORDER: usize = 3;

/// Shape of a jet: how many directions are seeded and the maximum total
/// degree tracked across all of them.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub struct JetSpace {
    dirs: u8,
    order: u8,
}

/// Precomputed combinatorics for one shape, built once and leaked.
struct Tables {
    midx: Vec<[u8; MAX_DIRS]>,
    factorial: Vec<f64>,
    slot: HashMap<[u8; MAX_DIRS], u32>,
    /// For each output slot `k`, the (i, j) coefficient pairs with
    /// `midx[i] + midx[j] == midx[k]`, ascending in `i`.
    pairs: Vec<Vec<(u32, u32)>>,
}

fn table_cache() -> &'static Mutex<HashMap<JetSpace, &'static Tables>> {
    static CACHE: OnceLock<Mutex<HashMap<JetSpace, &'static Tables>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn build_tables(space: JetSpace) -> Tables {
    let dirs = space.dirs as usize;
    let order = space.order as usize;
    let mut midx: Vec<[u8; MAX_DIRS]> = Vec::new();
    // Graded order: total degree first, lexicographic within a degree.
    for d in 0..=order {
        let mut cur = [0u8; MAX_DIRS];
        fn rec(
            cur: &mut [u8; MAX_DIRS],
            pos: usize,
            dirs: usize,
            left: usize,
            out: &mut Vec<[u8; MAX_DIRS]>,
        ) {
            if pos == dirs {
                if left == 0 {
                    out.push(*cur);
                }
                return;
            }
            for take in (0..=left).rev() {
                cur[pos] = take as u8;
                rec(cur, pos + 1, dirs, left - take, out);
            }
            cur[pos] = 0;
        }
        rec(&mut cur, 0, dirs, d, &mut midx);
    }
    let n = midx.len();
    let degree: Vec<u8> = midx
        .iter()
        .map(|m| m.iter().map(|&v| v as u32).sum::<u32>() as u8)
        .collect();
    let factorial: Vec<f64> = midx
        .iter()
        .map(|m| {
            m.iter()
                .map(|&v| match v {
                    0 | 1 => 1.0,
                    2 => 2.0,
                    3 => 6.0,
                    _ => unreachable!(),
                })
                .product()
        })
        .collect();
    let mut slot = HashMap::with_capacity(n);
    for (i, m) in midx.iter().enumerate() {
        slot.insert(*m, i as u32);
    }
    let mut pairs = vec![Vec::new(); n];
    for k in 0..n {
        for i in 0..n {
            if degree[i] > degree[k] {
                break; // graded order: all later slots have degree >= degree[k]
            }
            let mut rem = [0u8; MAX_DIRS];
            let mut ok = true;
            for d in 0..dirs {
                if midx[i][d] > midx[k][d] {
                    ok = false;
                    break;
                }
                rem[d] = midx[k][d] - midx[i][d];
            }
            if !ok {
                continue;
            }
            let j = slot[&rem];
            pairs[k].push((i as u32, j));
        }
    }
    Tables {
        midx,
        factorial,
        slot,
        pairs,
    }
}

impl JetSpace {
    pub fn new(dirs: usize, order: usize) -> Result<Self> {
        if dirs == 0 || dirs > MAX_DIRS {
            return Err(FrError::JetConfig {
                msg: format!("direction count {dirs} not in 1..={MAX_DIRS}"),
            });
        }
        if order == 0 || order > MAX_ORDER {
            return Err(FrError::JetConfig {
                msg: format!("order {order} not in 1..={MAX_ORDER}"),
            });
        }
        Ok(JetSpace {
            dirs: dirs as u8,
            order: order as u8,
        })
    }

    pub fn dirs(&self) -> usize {
        self.dirs as usize
    }
    pub fn order(&self) -> usize {
        self.order as usize
    }

    fn tables(&self) -> &'static Tables {
        let mut cache = table_cache().lock().unwrap();
        if let Some(t) = cache.get(self) {
            return t;
        }
        let t: &'static Tables = Box::leak(Box::new(build_tables(*self)));
        cache.insert(*self, t);
        t
    }

    pub fn len(&self) -> usize {
        self.tables().midx.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Jet of an independent variable: unit first partial in `dir`, zero
    /// everywhere else.
    pub fn seed<T: Scalar>(&self, value: T, dir: usize) -> Result<Jet<T>> {
        if dir >= self.dirs as usize {
            return Err(FrError::DirectionOutOfRange {
                dir,
                dirs: self.dirs as usize,
            });
        }
        let t = self.tables();
        let mut coeffs: Vec<T> = (0..t.midx.len()).map(|_| T::zero()).collect();
        coeffs[0] = value;
        let mut e = [0u8; MAX_DIRS];
        e[dir] = 1;
        coeffs[t.slot[&e] as usize] = T::one();
        Ok(Jet::Series {
            space: *self,
            coeffs,
        })
    }

    pub fn constant<T: Scalar>(&self, value: T) -> Jet<T> {
        Jet::Const(value)
    }
}

/// Truncated multivariate Taylor scalar. `Const` is a shape-free constant
/// (all derivatives zero); `Series` carries dense coefficients for one
/// [`JetSpace`]. Coefficients are Taylor coefficients, i.e. the partial
/// derivative divided by the multi-index factorial.
#[derive(Clone, Debug)]
pub enum Jet<T> {
    Const(T),
    Series { space: JetSpace, coeffs: Vec<T> },
}

impl<T: Scalar> Jet<T> {
    pub fn constant(value: T) -> Self {
        Jet::Const(value)
    }

    pub fn space(&self) -> Option<JetSpace> {
        match self {
            Jet::Const(_) => None,
            Jet::Series { space, .. } => Some(*space),
        }
    }

    fn lift(&self, space: JetSpace) -> Jet<T> {
        match self {
            Jet::Const(c) => {
                let n = space.len();
                let mut coeffs: Vec<T> = (0..n).map(|_| T::zero()).collect();
                coeffs[0] = c.clone();
                Jet::Series { space, coeffs }
            }
            Jet::Series { .. } => self.clone(),
        }
    }

    /// Taylor coefficient for a multi-index given as per-direction powers.
    pub fn coeff_multi(&self, counts: &[u8]) -> T {
        let mut full = [0u8; MAX_DIRS];
        full[..counts.len()].copy_from_slice(counts);
        match self {
            Jet::Const(c) => {
                if full.iter().all(|&v| v == 0) {
                    c.clone()
                } else {
                    T::zero()
                }
            }
            Jet::Series { space, coeffs } => {
                let t = space.tables();
                match t.slot.get(&full) {
                    Some(&s) => coeffs[s as usize].clone(),
                    None => T::zero(),
                }
            }
        }
    }

    /// Partial derivative for a multi-index (coefficient times factorial).
    pub fn partial_multi(&self, counts: &[u8]) -> T {
        let mut full = [0u8; MAX_DIRS];
        full[..counts.len()].copy_from_slice(counts);
        match self {
            Jet::Const(c) => {
                if full.iter().all(|&v| v == 0) {
                    c.clone()
                } else {
                    T::zero()
                }
            }
            Jet::Series { space, coeffs } => {
                let t = space.tables();
                match t.slot.get(&full) {
                    Some(&s) => {
                        let f = t.factorial[s as usize];
                        if f == 1.0 {
                            coeffs[s as usize].clone()
                        } else {
                            coeffs[s as usize].scale(f)
                        }
                    }
                    None => T::zero(),
                }
            }
        }
    }

    /// First partial with respect to direction `i`.
    pub fn d1(&self, i: usize) -> T {
        let mut c = [0u8; MAX_DIRS];
        c[i] += 1;
        self.partial_multi(&c)
    }

    /// Second partial `d²/d_i d_j`.
    pub fn d2(&self, i: usize, j: usize) -> T {
        let mut c = [0u8; MAX_DIRS];
        c[i] += 1;
        c[j] += 1;
        self.partial_multi(&c)
    }

    /// Third partial `d³/d_i d_j d_k`.
    pub fn d3(&self, i: usize, j: usize, k: usize) -> T {
        let mut c = [0u8; MAX_DIRS];
        c[i] += 1;
        c[j] += 1;
        c[k] += 1;
        self.partial_multi(&c)
    }

    fn binary(
        self,
        rhs: Self,
        cc: impl Fn(T, T) -> T,
        ss: impl Fn(JetSpace, Vec<T>, Vec<T>) -> Vec<T>,
    ) -> Self {
        match (self, rhs) {
            (Jet::Const(a), Jet::Const(b)) => Jet::Const(cc(a, b)),
            (a, b) => {
                let space = a
                    .space()
                    .or(b.space())
                    .expect("at least one series operand");
                if let (Some(sa), Some(sb)) = (a.space(), b.space()) {
                    assert_eq!(sa, sb, "jet shape mismatch: {sa:?} vs {sb:?}");
                }
                let a = match a {
                    c @ Jet::Const(_) => c.lift(space),
                    s => s,
                };
                let b = match b {
                    c @ Jet::Const(_) => c.lift(space),
                    s => s,
                };
                let (Jet::Series { coeffs: ca, .. }, Jet::Series { coeffs: cb, .. }) = (a, b)
                else {
                    unreachable!()
                };
                Jet::Series {
                    space,
                    coeffs: ss(space, ca, cb),
                }
            }
        }
    }

    fn zero_mask(coeffs: &[T]) -> Vec<bool> {
        coeffs.iter().map(|c| c.is_zero()).collect()
    }

    fn mul_impl(space: JetSpace, a: Vec<T>, b: Vec<T>) -> Vec<T> {
        let t = space.tables();
        let ma = Self::zero_mask(&a);
        let mb = Self::zero_mask(&b);
        let mut out = Vec::with_capacity(a.len());
        for k in 0..a.len() {
            let mut acc: Option<T> = None;
            for &(i, j) in &t.pairs[k] {
                let (i, j) = (i as usize, j as usize);
                if ma[i] || mb[j] {
                    continue;
                }
                let term = a[i].clone() * b[j].clone();
                acc = Some(match acc {
                    None => term,
                    Some(s) => s + term,
                });
            }
            out.push(acc.unwrap_or_else(T::zero));
        }
        out
    }

    fn div_impl(space: JetSpace, a: Vec<T>, b: Vec<T>) -> std::result::Result<Vec<T>, DomainError> {
        let t = space.tables();
        if b[0].value() == 0.0 {
            return Err(DomainError::DivByZero);
        }
        let mb = Self::zero_mask(&b);
        let mut out: Vec<T> = Vec::with_capacity(a.len());
        for k in 0..a.len() {
            let mut acc = a[k].clone();
            for &(i, j) in &t.pairs[k] {
                let (i, j) = (i as usize, j as usize);
                if j == 0 {
                    continue; // the b[0]*c[k] term solved for
                }
                if mb[j] || out[i].is_zero() {
                    continue;
                }
                acc = acc - b[j].clone() * out[i].clone();
            }
            out.push(acc.try_div(&b[0])?);
        }
        Ok(out)
    }

    /// Truncated composition: `c[k]` must be `f^(k)(a0) / k!`.
    fn compose(&self, c: &[T]) -> Self {
        match self {
            Jet::Const(_) => unreachable!("compose is only called on series"),
            Jet::Series { space, coeffs } => {
                let mut h = coeffs.clone();
                h[0] = T::zero();
                let h = Jet::Series {
                    space: *space,
                    coeffs: h,
                };
                let order = space.order();
                let top = order.min(c.len() - 1);
                let mut acc = Jet::Const(c[top].clone()).lift(*space);
                for k in (0..top).rev() {
                    acc = acc * h.clone();
                    acc = acc + Jet::Const(c[k].clone());
                }
                acc
            }
        }
    }

    fn unary_checked(
        &self,
        f: impl Fn(&T) -> std::result::Result<Vec<T>, DomainError>,
    ) -> std::result::Result<Self, DomainError> {
        match self {
            Jet::Const(a) => {
                let c = f(a)?;
                Ok(Jet::Const(c[0].clone()))
            }
            Jet::Series { coeffs, .. } => {
                let c = f(&coeffs[0])?;
                Ok(self.compose(&c))
            }
        }
    }

    fn unary(&self, f: impl Fn(&T) -> Vec<T>) -> Self {
        match self {
            Jet::Const(a) => Jet::Const(f(a)[0].clone()),
            Jet::Series { coeffs, .. } => self.compose(&f(&coeffs[0])),
        }
    }
}

impl<T: Scalar> Add for Jet<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.binary(
            rhs,
            |a, b| a + b,
            |_, a, b| a.into_iter().zip(b).map(|(x, y)| x + y).collect(),
        )
    }
}

impl<T: Scalar> Sub for Jet<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.binary(
            rhs,
            |a, b| a - b,
            |_, a, b| a.into_iter().zip(b).map(|(x, y)| x - y).collect(),
        )
    }
}

impl<T: Scalar> Mul for Jet<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        // Constant factors distribute coefficient-wise; no convolution.
        match (self, rhs) {
            (Jet::Const(a), Jet::Const(b)) => Jet::Const(a * b),
            (Jet::Const(a), Jet::Series { space, coeffs }) => Jet::Series {
                space,
                coeffs: coeffs.into_iter().map(|c| a.clone() * c).collect(),
            },
            (Jet::Series { space, coeffs }, Jet::Const(b)) => Jet::Series {
                space,
                coeffs: coeffs.into_iter().map(|c| c * b.clone()).collect(),
            },
            (a @ Jet::Series { .. }, b @ Jet::Series { .. }) => a.binary(b, |_, _| unreachable!(), Self::mul_impl),
        }
    }
}

impl<T: Scalar> Neg for Jet<T> {
    type Output = Self;
    fn neg(self) -> Self {
        match self {
            Jet::Const(a) => Jet::Const(-a),
            Jet::Series { space, coeffs } => Jet::Series {
                space,
                coeffs: coeffs.into_iter().map(|c| -c).collect(),
            },
        }
    }
}

impl<T: Scalar> Scalar for Jet<T> {
    fn from_f64(v: f64) -> Self {
        Jet::Const(T::from_f64(v))
    }

    fn value(&self) -> f64 {
        match self {
            Jet::Const(c) => c.value(),
            Jet::Series { coeffs, .. } => coeffs[0].value(),
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            Jet::Const(c) => c.is_zero(),
            Jet::Series { coeffs, .. } => coeffs.iter().all(|c| c.is_zero()),
        }
    }

    fn scale(&self, k: f64) -> Self {
        match self {
            Jet::Const(c) => Jet::Const(c.scale(k)),
            Jet::Series { space, coeffs } => Jet::Series {
                space: *space,
                coeffs: coeffs.iter().map(|c| c.scale(k)).collect(),
            },
        }
    }

    fn sin(&self) -> Self {
        self.unary(|a| {
            let s = a.sin();
            let c = a.cos();
            vec![s.clone(), c.clone(), s.scale(-0.5), c.scale(-1.0 / 6.0)]
        })
    }

    fn cos(&self) -> Self {
        self.unary(|a| {
            let s = a.sin();
            let c = a.cos();
            vec![c.clone(), -s.clone(), c.scale(-0.5), s.scale(1.0 / 6.0)]
        })
    }

    fn exp(&self) -> Self {
        self.unary(|a| {
            let e = a.exp();
            vec![e.clone(), e.clone(), e.scale(0.5), e.scale(1.0 / 6.0)]
        })
    }

    fn tanh(&self) -> Self {
        self.unary(|a| {
            let t = a.tanh();
            let u = T::one() - t.clone() * t.clone();
            let c3 = -(u.clone() * (T::one() - (t.clone() * t.clone()).scale(3.0))).scale(1.0 / 3.0);
            vec![t.clone(), u.clone(), -(t.clone() * u.clone()), c3]
        })
    }

    fn try_div(&self, rhs: &Self) -> std::result::Result<Self, DomainError> {
        match (self, rhs) {
            (a, Jet::Const(b)) => {
                // Scalar denominator: divide coefficients directly.
                match a {
                    Jet::Const(x) => Ok(Jet::Const(x.try_div(b)?)),
                    Jet::Series { space, coeffs } => {
                        let mut out = Vec::with_capacity(coeffs.len());
                        for c in coeffs {
                            out.push(c.try_div(b)?);
                        }
                        Ok(Jet::Series {
                            space: *space,
                            coeffs: out,
                        })
                    }
                }
            }
            (a, b @ Jet::Series { space, .. }) => {
                if let Some(sa) = a.space() {
                    assert_eq!(sa, *space, "jet shape mismatch in division");
                }
                let (Jet::Series { coeffs: ca, .. }, Jet::Series { coeffs: cb, .. }) =
                    (a.lift(*space), b.lift(*space))
                else {
                    unreachable!()
                };
                Ok(Jet::Series {
                    space: *space,
                    coeffs: Self::div_impl(*space, ca, cb)?,
                })
            }
        }
    }

    fn try_recip(&self) -> std::result::Result<Self, DomainError> {
        Jet::Const(T::one()).try_div(self)
    }

    fn try_sqrt(&self) -> std::result::Result<Self, DomainError> {
        match self {
            Jet::Const(a) => Ok(Jet::Const(a.try_sqrt()?)),
            _ => {
                if self.value() <= 0.0 {
                    return Err(DomainError::SqrtNonPositive(self.value()));
                }
                self.unary_checked(|a| {
                    let s = a.try_sqrt()?;
                    let inv = s.try_recip()?;
                    let c1 = inv.scale(0.5);
                    let inv2 = inv.clone() * inv.clone();
                    let c2 = (inv2.clone() * inv.clone()).scale(-1.0 / 8.0);
                    let c3 = (inv2.clone() * inv2.clone() * inv.clone()).scale(1.0 / 16.0);
                    Ok(vec![s, c1, c2, c3])
                })
            }
        }
    }

    fn try_ln(&self) -> std::result::Result<Self, DomainError> {
        if self.value() <= 0.0 {
            return Err(DomainError::LogNonPositive(self.value()));
        }
        self.unary_checked(|a| {
            let l = a.try_ln()?;
            let inv = a.try_recip()?;
            let c2 = (inv.clone() * inv.clone()).scale(-0.5);
            let c3 = (inv.clone() * inv.clone() * inv.clone()).scale(1.0 / 3.0);
            Ok(vec![l, inv, c2, c3])
        })
    }

    fn try_tan(&self) -> std::result::Result<Self, DomainError> {
        self.unary_checked(|a| {
            let t = a.try_tan()?;
            let u = T::one() + t.clone() * t.clone();
            let c2 = t.clone() * u.clone();
            let c3 = (u.clone() * (T::one() + (t.clone() * t.clone()).scale(3.0))).scale(1.0 / 3.0);
            Ok(vec![t, u, c2, c3])
        })
    }

    fn try_abs(&self) -> std::result::Result<Self, DomainError> {
        match self {
            Jet::Const(a) => Ok(Jet::Const(a.try_abs()?)),
            _ => {
                let v = self.value();
                if v == 0.0 {
                    return Err(DomainError::AbsAtZero);
                }
                Ok(if v < 0.0 { self.scale(-1.0) } else { self.clone() })
            }
        }
    }

    fn try_powi(&self, n: i32) -> std::result::Result<Self, DomainError> {
        if n < 0 && self.value() == 0.0 {
            return Err(DomainError::DivByZero);
        }
        if n == 0 {
            return Ok(Self::one());
        }
        Ok(powi_by_squaring(self.clone(), n))
    }

    fn try_powf(&self, e: f64) -> std::result::Result<Self, DomainError> {
        if e.fract() == 0.0 && e.abs() <= i32::MAX as f64 {
            return self.try_powi(e as i32);
        }
        if self.value() <= 0.0 {
            return Err(DomainError::PowNonPositiveBase(self.value()));
        }
        self.unary_checked(|a| {
            let p = a.try_powf(e)?;
            let inv = a.try_recip()?;
            let c1 = (p.clone() * inv.clone()).scale(e);
            let c2 = (c1.clone() * inv.clone()).scale((e - 1.0) / 2.0);
            let c3 = (c2.clone() * inv.clone()).scale((e - 2.0) / 3.0);
            Ok(vec![p, c1, c2, c3])
        })
    }
}

