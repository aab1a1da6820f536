//! Matching words `v = c1 d1 c2 ... cs`, their digit words and group
//! matrices in both parameter regimes, and the two word orders.
//!
//! Words are flat lists of positive integers with a parity convention:
//! letters at even indices (0-based) are `c`-letters, odd indices are
//! `d`-letters. A word usable as a matching candidate has odd length.

use crate::error::{Error, Result};
use crate::interval::Digit;
use crate::mobius::{generators, GroupParams, Mobius};
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

/// A word in positive integer letters.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    pub letters: Vec<u64>,
}

impl Word {
    pub fn new(letters: Vec<u64>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidWord("empty word".into()));
        }
        if letters.iter().any(|&x| x == 0) {
            return Err(Error::InvalidWord("letters must be >= 1".into()));
        }
        Ok(Word { letters })
    }

    /// Number of blocks `s` (for odd-length words).
    pub fn block_count(&self) -> usize {
        self.letters.len() / 2 + 1
    }

    /// Valid as a matching-word candidate: odd length, positive letters.
    pub fn is_candidate(&self) -> bool {
        self.letters.len() % 2 == 1
    }

    /// The `c`-letters (even positions).
    pub fn c_letters(&self) -> impl Iterator<Item = u64> + '_ {
        self.letters.iter().step_by(2).copied()
    }

    /// The `d`-letters (odd positions).
    pub fn d_letters(&self) -> impl Iterator<Item = u64> + '_ {
        self.letters.iter().skip(1).step_by(2).copied()
    }

    pub fn is_palindrome(&self) -> bool {
        let n = self.letters.len();
        (0..n / 2).all(|i| self.letters[i] == self.letters[n - 1 - i])
    }

    /// Sum of all letters; for small alpha this is `Sbar(v)`, for large
    /// alpha it is `Sunder(-k, v)`.
    pub fn letter_sum(&self) -> u64 {
        self.letters.iter().sum()
    }

    /// Left shift by `j` letters.
    pub fn shift(&self, j: usize) -> Option<Word> {
        if j >= self.letters.len() {
            return None;
        }
        Some(Word { letters: self.letters[j..].to_vec() })
    }

    /// Membership restriction for the intermediate regime `k = 1`:
    /// every `c`-letter is at most `n - 2`, and a word with first letter
    /// `n - 2` must be the single-letter word `n - 2` itself.
    pub fn check_intermediate(&self, n: u32) -> Result<()> {
        let cap = (n - 2) as u64;
        if self.c_letters().any(|c| c > cap) {
            return Err(Error::InvalidWord(format!(
                "c-letter exceeds n-2 = {cap} in the k = 1 regime"
            )));
        }
        if self.letters[0] == cap && self.letters.len() > 1 {
            return Err(Error::InvalidWord(format!(
                "only the single-letter word {cap} may start with n-2"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for l in &self.letters {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut letters = Vec::new();
        for (i, tok) in s.split_whitespace().enumerate() {
            let v: u64 = tok
                .parse()
                .map_err(|_| Error::InvalidWord(format!("bad letter '{tok}' at position {i}")))?;
            if v == 0 {
                return Err(Error::InvalidWord(format!("letter 0 at position {i}; letters must be >= 1")));
            }
            letters.push(v);
        }
        Word::new(letters)
    }
}

/// A digit word: simplified exponents for the small regime, full
/// alpha-digits for the large regime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DigitWord {
    /// Exponents of `A` (the `C`-exponent is always 1 for small alpha).
    Simplified(Vec<i64>),
    Full(Vec<Digit>),
}

impl DigitWord {
    pub fn len(&self) -> usize {
        match self {
            DigitWord::Simplified(v) => v.len(),
            DigitWord::Full(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `dbar(k, v) = k^{c1}, (k+1)^{d1}, ..., (k+1)^{d_{s-1}}, k^{cs}`.
pub fn digit_word_small(k: i64, v: &Word) -> Result<DigitWord> {
    if k < 1 {
        return Err(Error::InvalidWord("small regime requires k >= 1".into()));
    }
    if !v.is_candidate() {
        return Err(Error::InvalidWord("word must have an odd number of letters".into()));
    }
    let mut out = Vec::with_capacity(v.letter_sum() as usize);
    for (i, &p) in v.letters.iter().enumerate() {
        let e = if i % 2 == 0 { k } else { k + 1 };
        out.extend(std::iter::repeat(e).take(p as usize));
    }
    Ok(DigitWord::Simplified(out))
}

/// `bbar(-k, v)` as a word in the digits `(1,1)` and `(1,2)`, together with
/// `e(-k, v)`, the number of `(1,2)` entries.
///
/// For `k >= 2` this is `(1,2)^{n-2} E^{c1} F^{d1} ... E^{cs}` with
/// `E = (1,1) u^{k-2} (1,2)^{n-3}`, `F = E_{k+1}` and `u = (1,2)^{n-2}(1,1)`.
/// For `k = 1` the same expression applies after formal cancellation, which
/// is valid exactly on the restricted tree of the intermediate regime.
pub fn digit_word_large(k: i64, v: &Word, n: u32) -> Result<(DigitWord, usize)> {
    if k < 1 {
        return Err(Error::InvalidWord("large regime requires k >= 1".into()));
    }
    if !v.is_candidate() {
        return Err(Error::InvalidWord("word must have an odd number of letters".into()));
    }
    let d11 = Digit::new(1, 1);
    let d12 = Digit::new(1, 2);
    let mut out: Vec<Digit> = Vec::new();
    out.extend(std::iter::repeat(d12).take((n - 2) as usize));
    if k == 1 {
        v.check_intermediate(n)?;
        // E_1 cancels to (1,2)^{-1}: pop one trailing (1,2) per unit.
        for (i, &p) in v.letters.iter().enumerate() {
            if i % 2 == 0 {
                for _ in 0..p {
                    match out.pop() {
                        Some(d) if d == d12 => {}
                        _ => {
                            return Err(Error::InvalidWord(
                                "word leaves the intermediate-regime tree".into(),
                            ))
                        }
                    }
                }
            } else {
                // F = E_2 = (1,1)(1,2)^{n-3}
                for _ in 0..p {
                    out.push(d11);
                    out.extend(std::iter::repeat(d12).take((n - 3) as usize));
                }
            }
        }
    } else {
        let emit_u = |out: &mut Vec<Digit>| {
            out.extend(std::iter::repeat(d12).take((n - 2) as usize));
            out.push(d11);
        };
        let emit_block = |out: &mut Vec<Digit>, reps: u64, upow: i64| {
            for _ in 0..reps {
                out.push(d11);
                for _ in 0..upow {
                    emit_u(out);
                }
                out.extend(std::iter::repeat(d12).take((n - 3) as usize));
            }
        };
        for (i, &p) in v.letters.iter().enumerate() {
            let upow = if i % 2 == 0 { k - 2 } else { k - 1 };
            emit_block(&mut out, p, upow);
        }
    }
    let e = out.iter().filter(|d| **d == d12).count();
    Ok((DigitWord::Full(out), e))
}

/// `R_{k,v} = (A^k C)^{cs} (A^{k+1} C)^{d_{s-1}} ... (A^{k+1} C)^{d1} (A^k C)^{c1}`.
pub fn matrix_r_small(params: &GroupParams, k: i64, v: &Word) -> Result<Mobius> {
    let (a, c, _) = generators(params);
    let m_k = a.pow(k)?.compose(&c);
    let m_k1 = a.pow(k + 1)?.compose(&c);
    let mut out = Mobius::IDENTITY;
    for (i, &p) in v.letters.iter().rev().enumerate() {
        let m = if i % 2 == 0 { m_k } else { m_k1 };
        for _ in 0..p {
            out = out.compose(&m);
        }
    }
    Ok(out)
}

/// `L_{k,v} = C^-1 A C R_{k,v}`.
pub fn matrix_l_small(params: &GroupParams, k: i64, v: &Word) -> Result<Mobius> {
    let (a, c, _) = generators(params);
    let r = matrix_r_small(params, k, v)?;
    Ok(c.inverse()?.compose(&a).compose(&c).compose(&r))
}

/// `L_{-k,v} = (A^-k C)^{cs} (A^{-k-1} C)^{d_{s-1}} ... (A^-k C)^{c1} A^-1`.
pub fn matrix_l_large(params: &GroupParams, k: i64, v: &Word) -> Result<Mobius> {
    let (a, c, _) = generators(params);
    let m_k = a.pow(-k)?.compose(&c);
    let m_k1 = a.pow(-k - 1)?.compose(&c);
    let mut out = Mobius::IDENTITY;
    for (i, &p) in v.letters.iter().rev().enumerate() {
        let m = if i % 2 == 0 { m_k } else { m_k1 };
        for _ in 0..p {
            out = out.compose(&m);
        }
    }
    Ok(out.compose(&a.inverse()?))
}

/// `R_{-k,v} = C A^-1 C L_{-k,v}`.
pub fn matrix_r_large(params: &GroupParams, k: i64, v: &Word) -> Result<Mobius> {
    let (a, c, _) = generators(params);
    let l = matrix_l_large(params, k, v)?;
    Ok(c.compose(&a.inverse()?).compose(&c).compose(&l))
}

/// Alternating dictionary order on words: ascending at odd positions
/// (1-based; the `c`-letters), descending at even positions, and a proper
/// prefix precedes any continuation.
pub fn order_words(v1: &Word, v2: &Word) -> Ordering {
    for (i, (a, b)) in v1.letters.iter().zip(v2.letters.iter()).enumerate() {
        if a != b {
            return if i % 2 == 0 { a.cmp(b) } else { b.cmp(a) };
        }
    }
    v1.letters.len().cmp(&v2.letters.len())
}

/// Order on simplified digit words matching the real-line order of the
/// points they encode: a larger exponent precedes a smaller one at the
/// first difference, and a proper prefix precedes any continuation.
pub fn order_digits(w1: &DigitWord, w2: &DigitWord) -> Result<Ordering> {
    let (a, b) = match (w1, w2) {
        (DigitWord::Simplified(a), DigitWord::Simplified(b)) => (a, b),
        _ => {
            return Err(Error::UnsupportedCase(
                "digit order is defined on simplified digit words".into(),
            ))
        }
    };
    for (x, y) in a.iter().zip(b.iter()) {
        if x != y {
            return Ok(y.cmp(x));
        }
    }
    Ok(a.len().cmp(&b.len()))
}

/// `v'` of the matching theory:
/// `1 (c1-1) 1 c2 ... 1 cs` when `c1 != 1`, else `(d1+1) 1 ... d_{s-1} 1`.
pub fn v_prime(v: &Word) -> Result<Word> {
    if !v.is_candidate() {
        return Err(Error::InvalidWord("v' requires a block word".into()));
    }
    let c: Vec<u64> = v.c_letters().collect();
    let d: Vec<u64> = v.d_letters().collect();
    if c[0] != 1 {
        let mut out = vec![1, c[0] - 1];
        for &ci in &c[1..] {
            out.push(1);
            out.push(ci);
        }
        Word::new(out)
    } else {
        if d.is_empty() {
            return Err(Error::UnsupportedCase(
                "v' of a length-one word with c1 = 1 is a base case not derivable here".into(),
            ));
        }
        let mut out = vec![d[0] + 1, 1];
        for &di in &d[1..] {
            out.push(di);
            out.push(1);
        }
        Word::new(out)
    }
}

/// The parent of `v`: its longest proper suffix that is also a prefix.
pub fn parent(v: &Word) -> Option<Word> {
    let n = v.letters.len();
    for len in (1..n).rev() {
        if v.letters[n - len..] == v.letters[..len] {
            return Some(Word { letters: v.letters[..len].to_vec() });
        }
    }
    None
}

/// `Theta_q(v) = v (v')^q v''` where `v = u v''` for the parent `u`
/// (supplied or inferred as the longest proper suffix/prefix).
///
/// Experimental: the base cases for very short words are not reconstructible
/// from the matching identities alone and are refused.
pub fn theta(v: &Word, q: u64, parent_hint: Option<&Word>) -> Result<Word> {
    let u = match parent_hint {
        Some(u) => {
            if u.letters.len() >= v.letters.len()
                || v.letters[..u.letters.len()] != u.letters[..]
            {
                return Err(Error::Precondition(
                    "supplied parent is not a proper prefix of v".into(),
                ));
            }
            u.clone()
        }
        None => parent(v).ok_or_else(|| {
            Error::UnsupportedCase(format!(
                "no parent decomposition inferable for '{v}'; Theta base cases for short words are out of scope"
            ))
        })?,
    };
    let suffix = &v.letters[u.letters.len()..];
    let vp = v_prime(v)?;
    let mut out = v.letters.clone();
    for _ in 0..q {
        out.extend_from_slice(&vp.letters);
    }
    out.extend_from_slice(suffix);
    Word::new(out)
}
