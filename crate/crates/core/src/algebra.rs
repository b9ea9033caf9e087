//! Exact normal ordering of single-mode ladder-operator words and the
//! combinatorial numbers the witnesses need.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use num_rational::Ratio;

use crate::error::{Error, Result};

/// Longest word [`normal_order`] accepts.
pub const MAX_WORD_LEN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ladder {
    /// `a`
    Annihilate,
    /// `a†`
    Create,
}

/// A product of ladder operators, read left to right.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct OperatorWord(Vec<Ladder>);

impl OperatorWord {
    pub fn identity() -> Self {
        OperatorWord(Vec::new())
    }

    pub fn new(letters: Vec<Ladder>) -> Self {
        OperatorWord(letters)
    }

    pub fn letters(&self) -> &[Ladder] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Appends `letter` `count` times.
    pub fn then(mut self, letter: Ladder, count: usize) -> Self {
        self.0.extend(std::iter::repeat_n(letter, count));
        self
    }

    /// `a†ᵖ aᵠ`
    pub fn monomial(p: usize, q: usize) -> Self {
        Self::identity()
            .then(Ladder::Create, p)
            .then(Ladder::Annihilate, q)
    }

    pub fn concat(&self, other: &OperatorWord) -> Self {
        let mut letters = self.0.clone();
        letters.extend_from_slice(&other.0);
        OperatorWord(letters)
    }
}

impl fmt::Display for OperatorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(match l {
                Ladder::Annihilate => "a",
                Ladder::Create => "a+",
            })?;
        }
        Ok(())
    }
}

/// `Σ c_{pq} a†ᵖ aᵠ` with exact integer coefficients; zero terms are never
/// stored, so structural equality is operator equality.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NormalForm {
    terms: BTreeMap<(u32, u32), i128>,
}

impl NormalForm {
    pub fn zero() -> Self {
        NormalForm::default()
    }

    pub fn identity() -> Self {
        Self::monomial(0, 0, 1)
    }

    pub fn monomial(p: u32, q: u32, coeff: i128) -> Self {
        let mut nf = NormalForm::zero();
        if coeff != 0 {
            nf.terms.insert((p, q), coeff);
        }
        nf
    }

    /// `(dagger_power, annihilation_power) -> coefficient`
    pub fn terms(&self) -> &BTreeMap<(u32, u32), i128> {
        &self.terms
    }

    pub fn coeff(&self, p: u32, q: u32) -> i128 {
        self.terms.get(&(p, q)).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, key: (u32, u32), coeff: i128) -> Result<()> {
        if coeff == 0 {
            return Ok(());
        }
        let slot = self.terms.entry(key).or_insert(0);
        *slot = slot.checked_add(coeff).ok_or(Error::Overflow)?;
        if *slot == 0 {
            self.terms.remove(&key);
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &NormalForm) -> Result<NormalForm> {
        let mut out = self.clone();
        for (&k, &c) in &other.terms {
            out.add_term(k, c)?;
        }
        Ok(out)
    }

    pub fn checked_scale(&self, factor: i128) -> Result<NormalForm> {
        let mut out = NormalForm::zero();
        for (&k, &c) in &self.terms {
            out.add_term(k, c.checked_mul(factor).ok_or(Error::Overflow)?)?;
        }
        Ok(out)
    }

    /// Right multiplication by one letter:
    /// `a†ᵖaᵠ · a = a†ᵖaᵠ⁺¹` and `a†ᵖaᵠ · a† = q a†ᵖaᵠ⁻¹ + a†ᵖ⁺¹aᵠ`.
    pub fn mul_letter(&self, letter: Ladder) -> Result<NormalForm> {
        let mut out = NormalForm::zero();
        for (&(p, q), &c) in &self.terms {
            match letter {
                Ladder::Annihilate => out.add_term((p, q + 1), c)?,
                Ladder::Create => {
                    if q > 0 {
                        let k = c.checked_mul(q as i128).ok_or(Error::Overflow)?;
                        out.add_term((p, q - 1), k)?;
                    }
                    out.add_term((p + 1, q), c)?;
                }
            }
        }
        Ok(out)
    }

    /// Normally ordered product `self · other`.
    pub fn checked_mul(&self, other: &NormalForm) -> Result<NormalForm> {
        let mut out = NormalForm::zero();
        for (&(p, q), &c) in &other.terms {
            let mut partial = self.clone();
            for _ in 0..p {
                partial = partial.mul_letter(Ladder::Create)?;
            }
            for _ in 0..q {
                partial = partial.mul_letter(Ladder::Annihilate)?;
            }
            out = out.checked_add(&partial.checked_scale(c)?)?;
        }
        Ok(out)
    }

    /// Largest power of either operator appearing in a term.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|&(p, q)| p.max(q)).max().unwrap_or(0)
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (&(p, q), &c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{c}·a†^{p}·a^{q}")?;
        }
        Ok(())
    }
}

/// Rewrites `word` into normal order by pushing every `a` right past the
/// `a†`s that follow it.
pub fn normal_order(word: &OperatorWord) -> Result<NormalForm> {
    if word.len() > MAX_WORD_LEN {
        return Err(Error::WordTooLong {
            len: word.len(),
            max: MAX_WORD_LEN,
        });
    }
    word.letters()
        .iter()
        .try_fold(NormalForm::identity(), |acc, &l| acc.mul_letter(l))
}

/// `⟨α| form |α⟩ = Σ c_{pq} α*ᵖ αᵠ`.
pub fn coherent_expectation(form: &NormalForm, alpha: Complex64) -> Complex64 {
    let conj = alpha.conj();
    form.terms()
        .iter()
        .map(|(&(p, q), &c)| c as f64 * conj.powu(p) * alpha.powu(q))
        .sum()
}

/// Largest argument accepted by [`stirling2`].
pub const MAX_STIRLING: u32 = 30;

/// Stirling number of the second kind `S(e, f)`, the number of partitions of
/// an `e`-set into `f` blocks.
pub fn stirling2(e: u32, f: u32) -> Result<u128> {
    if e > MAX_STIRLING || f > MAX_STIRLING {
        return Err(Error::out_of_range(format!(
            "stirling2({e}, {f}) needs arguments <= {MAX_STIRLING}"
        )));
    }
    if f > e {
        return Ok(0);
    }
    // row-by-row triangular recurrence S(n,k) = k S(n-1,k) + S(n-1,k-1)
    let f = f as usize;
    let mut row = vec![0u128; f + 1];
    row[0] = 1;
    for n in 1..=e as usize {
        for k in (1..=f.min(n)).rev() {
            row[k] = k as u128 * row[k] + row[k - 1];
        }
        row[0] = 0;
    }
    Ok(row[f])
}

pub(crate) fn binomial(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// `(1/2)_{l/2} = (l−1)!! / 2^{l/2}`, the coherent-state value of the
/// `l`-th central quadrature moment.
pub fn pochhammer_half(l: u32) -> Result<Ratio<u64>> {
    if l % 2 != 0 || l == 0 {
        return Err(Error::domain(format!("pochhammer_half needs even l >= 2, got {l}")));
    }
    if l > 30 {
        return Err(Error::out_of_range(format!("pochhammer_half({l}) needs l <= 30")));
    }
    let double_fact: u64 = (1..l as u64).step_by(2).product();
    Ok(Ratio::new(double_fact, 1u64 << (l / 2)))
}
