//! Exact model of `H*(U(k))`: the exterior algebra on odd generators
//! `c_1, …, c_k` with `deg c_i = 2i - 1`.
//!
//! Classes are sparse maps from ascending generator-index lists to nonzero
//! coefficients. Coefficients are generic; the crate root fixes them to
//! [`BigRational`] for the canonical text form and the CLI.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::Neg;

/// Exact coefficient ring for cohomology classes.
pub trait Coefficient: Clone + PartialEq + fmt::Debug + Num + Neg<Output = Self> + FromPrimitive {}

impl<Q> Coefficient for Q where Q: Clone + PartialEq + fmt::Debug + Num + Neg<Output = Q> + FromPrimitive {}

/// The algebra `Λ[c_1, …, c_k]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AlgebraContext {
    k: usize,
}

impl AlgebraContext {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::input("exterior algebra needs k >= 1 generators"));
        }
        Ok(AlgebraContext { k })
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    /// Cohomological degree `2i - 1` of generator `i` (1-based).
    #[inline]
    pub fn degree(&self, i: usize) -> usize {
        debug_assert!(i >= 1);
        2 * i - 1
    }

    /// Sum of generator degrees of a monomial.
    pub fn monomial_degree(&self, monomial: &Monomial) -> usize {
        monomial.0.iter().map(|&i| self.degree(i)).sum()
    }

    fn check_same(&self, other: &AlgebraContext) -> Result<()> {
        if self != other {
            return Err(Error::ContextMismatch {
                left: self.k,
                right: other.k,
            });
        }
        Ok(())
    }
}

/// Strictly ascending list of 1-based generator indices. The empty list is
/// the unit.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<usize>);

impl Monomial {
    pub fn new(ctx: &AlgebraContext, indices: Vec<usize>) -> Result<Self> {
        if indices.iter().any(|&i| i == 0 || i > ctx.k) {
            return Err(Error::InvalidIndices {
                indices,
                reason: "generator index outside 1..=k",
            });
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidIndices {
                indices,
                reason: "indices must be strictly ascending",
            });
        }
        Ok(Monomial(indices))
    }

    pub fn unit() -> Self {
        Monomial(Vec::new())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    /// Product of two monomials as `(sign, merged)`, or `None` when a
    /// generator repeats. The sign is the Koszul sign of the shuffle that
    /// sorts `self ++ other`, computed from generator degrees.
    pub fn merge(&self, other: &Monomial, ctx: &AlgebraContext) -> Option<(bool, Monomial)> {
        let (a, b) = (&self.0, &other.0);
        let mut merged = Vec::with_capacity(a.len() + b.len());
        let mut negative = false;
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i] < b[j]) {
                merged.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j] < a[i] {
                // b[j] jumps over every remaining a[i..]
                let dy = ctx.degree(b[j]);
                let crossed: usize = a[i..].iter().map(|&x| ctx.degree(x) * dy).sum();
                negative ^= crossed % 2 == 1;
                merged.push(b[j]);
                j += 1;
            } else {
                return None;
            }
        }
        Some((negative, Monomial(merged)))
    }
}

/// Element of `Λ[c_1, …, c_k]` with exact coefficients. May be inhomogeneous.
#[derive(Clone, Debug, PartialEq)]
pub struct CohomologyClass<Q> {
    ctx: AlgebraContext,
    terms: BTreeMap<Monomial, Q>,
}

impl<Q: Coefficient> CohomologyClass<Q> {
    pub fn zero(ctx: AlgebraContext) -> Self {
        CohomologyClass {
            ctx,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(ctx: AlgebraContext) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::unit(), Q::one());
        CohomologyClass { ctx, terms }
    }

    /// The generator `c_i`. Generators beyond `k` are the zero class.
    pub fn generator(ctx: AlgebraContext, i: usize) -> Result<Self> {
        if i == 0 {
            return Err(Error::InvalidIndices {
                indices: vec![i],
                reason: "generator indices start at 1",
            });
        }
        if i > ctx.k {
            return Ok(Self::zero(ctx));
        }
        Self::monomial(ctx, vec![i], Q::one())
    }

    pub fn monomial(ctx: AlgebraContext, indices: Vec<usize>, coefficient: Q) -> Result<Self> {
        Self::from_terms(ctx, [(indices, coefficient)])
    }

    /// Sums the given terms; repeated monomials accumulate and zero
    /// coefficients are dropped.
    pub fn from_terms<I>(ctx: AlgebraContext, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, Q)>,
    {
        let mut out = Self::zero(ctx);
        for (indices, q) in terms {
            let m = Monomial::new(&ctx, indices)?;
            out.accumulate(m, q);
        }
        Ok(out)
    }

    fn accumulate(&mut self, m: Monomial, q: Q) {
        if q.is_zero() {
            return;
        }
        match self.terms.remove(&m) {
            Some(prev) => {
                let sum = prev + q;
                if !sum.is_zero() {
                    self.terms.insert(m, sum);
                }
            }
            None => {
                self.terms.insert(m, q);
            }
        }
    }

    #[inline]
    pub fn context(&self) -> AlgebraContext {
        self.ctx
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical (lexicographic monomial) order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    /// Coefficient of the monomial with the given indices (zero if absent).
    pub fn coefficient(&self, indices: &[usize]) -> Q {
        self.terms
            .get(&Monomial(indices.to_vec()))
            .cloned()
            .unwrap_or_else(Q::zero)
    }

    /// The common degree of all terms, if the class is homogeneous and nonzero.
    pub fn homogeneous_degree(&self) -> Option<usize> {
        let mut degrees = self.terms.keys().map(|m| self.ctx.monomial_degree(m));
        let first = degrees.next()?;
        degrees.all(|d| d == first).then_some(first)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.ctx.check_same(&other.ctx)?;
        let mut out = self.clone();
        for (m, q) in &other.terms {
            out.accumulate(m.clone(), q.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        CohomologyClass {
            ctx: self.ctx,
            terms: self.terms.iter().map(|(m, q)| (m.clone(), -q.clone())).collect(),
        }
    }

    pub fn scale(&self, factor: &Q) -> Self {
        let mut out = Self::zero(self.ctx);
        for (m, q) in &self.terms {
            out.accumulate(m.clone(), q.clone() * factor.clone());
        }
        out
    }

    /// Cup product.
    pub fn cup(&self, other: &Self) -> Result<Self> {
        self.ctx.check_same(&other.ctx)?;
        let mut out = Self::zero(self.ctx);
        for (ma, qa) in &self.terms {
            for (mb, qb) in &other.terms {
                if let Some((negative, m)) = ma.merge(mb, &self.ctx) {
                    let q = qa.clone() * qb.clone();
                    out.accumulate(m, if negative { -q } else { q });
                }
            }
        }
        Ok(out)
    }
}

/// Cup product of two classes in the same algebra.
pub fn cup<Q: Coefficient>(a: &CohomologyClass<Q>, b: &CohomologyClass<Q>) -> Result<CohomologyClass<Q>> {
    a.cup(b)
}

/// `c_{i_0} ⌣ … ⌣ c_{i_m}` for a strictly ascending index list. Indices
/// beyond `k` name zero generators, so any such index zeroes the product.
pub fn obstruction_product<Q: Coefficient>(ctx: AlgebraContext, indices: &[usize]) -> Result<CohomologyClass<Q>> {
    if indices.contains(&0) {
        return Err(Error::InvalidIndices {
            indices: indices.to_vec(),
            reason: "generator indices start at 1",
        });
    }
    if indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidIndices {
            indices: indices.to_vec(),
            reason: "indices must be strictly ascending",
        });
    }
    let mut acc = CohomologyClass::one(ctx);
    for &i in indices {
        acc = acc.cup(&CohomologyClass::generator(ctx, i)?)?;
        if acc.is_zero() {
            break;
        }
    }
    Ok(acc)
}

/// Coefficient `(-1)^(n+1) / (n-1)!` of the n-th odd Chern class in the odd
/// Chern character, for `n >= 1`.
pub fn odd_chern_coefficient<Q: Coefficient>(n: usize) -> Q {
    assert!(n >= 1, "odd Chern classes are indexed from 1");
    let mut factorial = Q::one();
    for m in 2..n {
        factorial = factorial * Q::from_usize(m).expect("factorial factor fits the coefficient ring");
    }
    let magnitude = Q::one() / factorial;
    if n % 2 == 1 {
        magnitude
    } else {
        -magnitude
    }
}

/// `Σ_{n=1}^{N} (-1)^(n+1)/(n-1)! · chern[n-1]`, where `chern[n-1]` is the
/// n-th odd Chern class. The rank term is absent in odd degree.
pub fn odd_chern_character<Q: Coefficient>(chern: &[CohomologyClass<Q>]) -> Result<CohomologyClass<Q>> {
    let first = chern
        .first()
        .ok_or_else(|| Error::input("odd Chern character needs at least one class"))?;
    let mut acc = CohomologyClass::zero(first.ctx);
    for (offset, class) in chern.iter().enumerate() {
        let coeff = odd_chern_coefficient::<Q>(offset + 1);
        acc = acc.add(&class.scale(&coeff))?;
    }
    Ok(acc)
}

fn format_rational(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Canonical text: terms `p/q * c<i>^c<j>…` joined by ` + ` in monomial
/// order, `1` for the unit monomial and `0` for the zero class.
impl fmt::Display for CohomologyClass<BigRational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (n, (m, q)) in self.terms.iter().enumerate() {
            if n > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{} * ", format_rational(q))?;
            if m.0.is_empty() {
                f.write_str("1")?;
            } else {
                let gens: Vec<String> = m.0.iter().map(|i| format!("c{i}")).collect();
                f.write_str(&gens.join("^"))?;
            }
        }
        Ok(())
    }
}

/// Parses the canonical text form back into a class of `ctx`.
pub fn parse_class(ctx: AlgebraContext, text: &str) -> Result<CohomologyClass<BigRational>> {
    let text = text.trim();
    if text == "0" {
        return Ok(CohomologyClass::zero(ctx));
    }
    let mut terms = Vec::new();
    for raw in text.split('+') {
        let (coeff, mono) = raw
            .split_once('*')
            .ok_or_else(|| Error::Parse(format!("term {raw:?} lacks `coefficient * monomial`")))?;
        let q = parse_rational(coeff.trim())?;
        let mono = mono.trim();
        let indices = if mono == "1" {
            Vec::new()
        } else {
            mono.split('^')
                .map(|g| {
                    g.trim()
                        .strip_prefix('c')
                        .and_then(|i| i.parse::<usize>().ok())
                        .ok_or_else(|| Error::Parse(format!("bad generator {g:?}")))
                })
                .collect::<Result<Vec<_>>>()?
        };
        terms.push((indices, q));
    }
    CohomologyClass::from_terms(ctx, terms)
}

/// Parses `p/q` or `p` into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("bad rational {text:?}"));
    let (p, q) = match text.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (text.trim(), "1"),
    };
    let p: BigInt = p.parse().map_err(|_| bad())?;
    let q: BigInt = q.parse().map_err(|_| bad())?;
    if q.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(p, q))
}
