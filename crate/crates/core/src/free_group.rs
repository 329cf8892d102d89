//! Words in a finite-rank free group: parsing, free and cyclic reduction,
//! abelianization, and the action of (type II) Whitehead automorphisms.
//!
//! Letters are signed generator indices. A [`Word`] is always freely
//! reduced; a [`CyclicWord`] is additionally cyclically reduced and stored
//! as its lexicographically least rotation, so equality of cyclic words is
//! plain structural equality.

use std::fmt;

use num_integer::Integer;
use thiserror::Error;

/// Hard cap on enumerable rank: automorphism supports are 2*rank-bit masks.
pub const MAX_ENUMERABLE_RANK: usize = 31;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FreeGroupError {
    #[error("alphabet must contain at least one generator")]
    EmptyAlphabet,
    #[error("duplicate generator name `{0}`")]
    DuplicateGenerator(String),
    #[error("invalid generator name `{0}`: names are lowercase-initial identifiers")]
    InvalidGeneratorName(String),
    #[error("unknown generator name in token `{0}`")]
    UnknownGenerator(String),
    #[error("malformed exponent in token `{0}`")]
    MalformedExponent(String),
    #[error("empty exponent base in token `{0}`")]
    EmptyExponentBase(String),
    #[error("malformed token `{0}`")]
    MalformedToken(String),
    #[error("letter refers to generator {gen} but the automorphism is over rank {rank}")]
    AlphabetMismatch { gen: usize, rank: usize },
    #[error("automorphism multiplier must lie in its support")]
    MultiplierNotInSupport,
    #[error("automorphism support must not contain the multiplier inverse")]
    InverseInSupport,
    #[error("rank {rank} exceeds the enumeration guard {guard}")]
    RankGuardExceeded { rank: usize, guard: usize },
}

/// Ordered generator names; rank is the number of names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
}

impl Alphabet {
    pub fn new<I, S>(names: I) -> Result<Self, FreeGroupError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(FreeGroupError::EmptyAlphabet);
        }
        for (i, name) in names.iter().enumerate() {
            if !valid_generator_name(name) {
                return Err(FreeGroupError::InvalidGeneratorName(name.clone()));
            }
            if names[..i].contains(name) {
                return Err(FreeGroupError::DuplicateGenerator(name.clone()));
            }
        }
        Ok(Alphabet { names })
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, gen: usize) -> &str {
        &self.names[gen]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

fn valid_generator_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => chars.all(|c| c.is_ascii_alphanumeric()),
        _ => false,
    }
}

/// Exponent sign of a letter; `Plus` orders before `Minus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// A generator or its inverse. The derived order (generator index, then
/// `+` before `-`) is the canonical letter order used for cyclic-word
/// rotation, support bitmasks, and tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub gen: usize,
    pub sign: Sign,
}

impl Letter {
    pub fn positive(gen: usize) -> Letter {
        Letter { gen, sign: Sign::Plus }
    }

    pub fn negative(gen: usize) -> Letter {
        Letter { gen, sign: Sign::Minus }
    }

    pub fn inverse(self) -> Letter {
        Letter { gen: self.gen, sign: self.sign.flip() }
    }

    pub fn is_inverse_of(self, other: Letter) -> bool {
        self.gen == other.gen && self.sign != other.sign
    }

    /// Position in the canonical letter order: `2*gen` for `x`, `2*gen+1`
    /// for `x^-1`. Doubles as the support bitmask bit and as the vertex id
    /// of the Whitehead-graph vertex this letter reads into.
    pub fn index(self) -> usize {
        2 * self.gen + (self.sign == Sign::Minus) as usize
    }

    pub fn from_index(index: usize) -> Letter {
        Letter {
            gen: index / 2,
            sign: if index.is_multiple_of(2) { Sign::Plus } else { Sign::Minus },
        }
    }

    pub fn display(self, alphabet: &Alphabet) -> String {
        match self.sign {
            Sign::Plus => alphabet.name(self.gen).to_string(),
            Sign::Minus => format!("{}^-1", alphabet.name(self.gen)),
        }
    }
}

/// A freely reduced word. The empty word is the identity.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn empty() -> Word {
        Word { letters: Vec::new() }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Word {
        // Reversal of a reduced word is reduced.
        Word {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    pub fn concat(&self, other: &Word) -> Word {
        free_reduce(self.letters.iter().chain(other.letters.iter()).copied())
    }

    pub fn display(&self, alphabet: &Alphabet) -> String {
        self.letters
            .iter()
            .map(|l| l.display(alphabet))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "g{}", l.gen)?;
            if l.sign == Sign::Minus {
                write!(f, "^-1")?;
            }
        }
        Ok(())
    }
}

/// Cancel adjacent inverse pairs until none remain.
pub fn free_reduce<I: IntoIterator<Item = Letter>>(letters: I) -> Word {
    let mut stack: Vec<Letter> = Vec::new();
    for letter in letters {
        if stack.last().is_some_and(|&top| top.is_inverse_of(letter)) {
            stack.pop();
        } else {
            stack.push(letter);
        }
    }
    Word { letters: stack }
}

/// A cyclically reduced word read circularly, stored as its
/// lexicographically least rotation.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CyclicWord {
    letters: Vec<Letter>,
}

impl CyclicWord {
    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// The canonical rotation as a linear word (it is freely reduced).
    pub fn to_word(&self) -> Word {
        Word { letters: self.letters.clone() }
    }

    pub fn display(&self, alphabet: &Alphabet) -> String {
        self.to_word().display(alphabet)
    }
}

/// Index of the lexicographically least rotation of `letters`.
fn least_rotation(letters: &[Letter]) -> usize {
    let n = letters.len();
    let mut best = 0;
    for start in 1..n {
        for i in 0..n {
            let a = letters[(start + i) % n];
            let b = letters[(best + i) % n];
            match a.cmp(&b) {
                std::cmp::Ordering::Less => {
                    best = start;
                    break;
                }
                std::cmp::Ordering::Greater => break,
                std::cmp::Ordering::Equal => {}
            }
        }
    }
    best
}

/// Split `w` as `conjugator * c * conjugator^-1` with `c` cyclically
/// reduced and canonically rotated.
pub fn cyclic_reduce(w: &Word) -> (CyclicWord, Word) {
    let mut letters = w.letters.to_vec();
    let mut prefix: Vec<Letter> = Vec::new();
    while letters.len() >= 2 && letters[0].is_inverse_of(*letters.last().unwrap()) {
        prefix.push(letters[0]);
        letters.pop();
        letters.remove(0);
    }
    if letters.is_empty() {
        return (CyclicWord::default(), Word { letters: prefix });
    }
    // Rotating the core by r moves its first r letters into the conjugator.
    let r = least_rotation(&letters);
    prefix.extend_from_slice(&letters[..r]);
    letters.rotate_left(r);
    (CyclicWord { letters }, Word { letters: prefix })
}

/// Exponent-sum vector of a word, one entry per generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbelianVector(pub Vec<i64>);

impl AbelianVector {
    pub fn entries(&self) -> &[i64] {
        &self.0
    }
}

pub fn abelianize(w: &Word, alphabet: &Alphabet) -> AbelianVector {
    let mut sums = vec![0i64; alphabet.rank()];
    for l in w.letters() {
        match l.sign {
            Sign::Plus => sums[l.gen] += 1,
            Sign::Minus => sums[l.gen] -= 1,
        }
    }
    AbelianVector(sums)
}

/// True iff the vector extends to a basis of Z^n, i.e. the gcd of its
/// entries is 1. The gcd of the zero vector is 0, so the zero vector is
/// rejected.
pub fn homology_primitive(v: &AbelianVector) -> bool {
    v.0.iter().fold(0i64, |g, &x| g.gcd(&x)) == 1
}

/// A type II Whitehead automorphism: a multiplier letter `a` and a support
/// set `A` of letters with `a` in `A` and `a^-1` not in `A`. Letters `x`
/// outside `{a, a^-1}` map to `a^α x a^-β` with `α = [x ∈ A]`,
/// `β = [x^-1 ∈ A]`; `a` and `a^-1` are fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WhiteheadAut {
    rank: usize,
    multiplier: Letter,
    support: u64,
}

impl WhiteheadAut {
    pub fn new<I>(rank: usize, multiplier: Letter, support: I) -> Result<Self, FreeGroupError>
    where
        I: IntoIterator<Item = Letter>,
    {
        if rank > MAX_ENUMERABLE_RANK {
            return Err(FreeGroupError::RankGuardExceeded { rank, guard: MAX_ENUMERABLE_RANK });
        }
        let mut bits = 0u64;
        for l in support {
            if l.gen >= rank {
                return Err(FreeGroupError::AlphabetMismatch { gen: l.gen, rank });
            }
            bits |= 1 << l.index();
        }
        if multiplier.gen >= rank {
            return Err(FreeGroupError::AlphabetMismatch { gen: multiplier.gen, rank });
        }
        if bits & (1 << multiplier.index()) == 0 {
            return Err(FreeGroupError::MultiplierNotInSupport);
        }
        if bits & (1 << multiplier.inverse().index()) != 0 {
            return Err(FreeGroupError::InverseInSupport);
        }
        Ok(WhiteheadAut { rank, multiplier, support: bits })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn multiplier(&self) -> Letter {
        self.multiplier
    }

    pub fn contains(&self, l: Letter) -> bool {
        self.support & (1 << l.index()) != 0
    }

    pub fn support_letters(&self) -> Vec<Letter> {
        (0..2 * self.rank)
            .filter(|&i| self.support & (1 << i) != 0)
            .map(Letter::from_index)
            .collect()
    }

    /// Support `{a}` alone fixes every letter.
    pub fn is_identity(&self) -> bool {
        self.support == 1 << self.multiplier.index()
    }

    /// `(A, a)^-1 = ((A \ {a}) ∪ {a^-1}, a^-1)`.
    pub fn inverse(&self) -> WhiteheadAut {
        let a = self.multiplier;
        let support = (self.support & !(1 << a.index())) | (1 << a.inverse().index());
        WhiteheadAut { rank: self.rank, multiplier: a.inverse(), support }
    }

    /// Deterministic ordering key: multiplier position, then support mask.
    pub fn sort_key(&self) -> (usize, u64) {
        (self.multiplier.index(), self.support)
    }

    /// Image of a single letter, before free reduction (at most 3 letters).
    fn image_of(&self, x: Letter, out: &mut Vec<Letter>) {
        let a = self.multiplier;
        if x.gen == a.gen {
            out.push(x);
            return;
        }
        if self.contains(x) {
            out.push(a);
        }
        out.push(x);
        if self.contains(x.inverse()) {
            out.push(a.inverse());
        }
    }

    pub fn apply(&self, w: &Word) -> Result<Word, FreeGroupError> {
        let mut raw = Vec::with_capacity(3 * w.len());
        for &x in w.letters() {
            if x.gen >= self.rank {
                return Err(FreeGroupError::AlphabetMismatch { gen: x.gen, rank: self.rank });
            }
            self.image_of(x, &mut raw);
        }
        Ok(free_reduce(raw))
    }

    /// Image of a conjugacy class: act on the canonical representative and
    /// re-reduce cyclically.
    pub fn apply_to_cyclic(&self, c: &CyclicWord) -> Result<CyclicWord, FreeGroupError> {
        let image = self.apply(&c.to_word())?;
        Ok(cyclic_reduce(&image).0)
    }
}

pub fn apply_whitehead_aut(aut: &WhiteheadAut, w: &Word) -> Result<Word, FreeGroupError> {
    aut.apply(w)
}

/// Number of non-identity type II automorphisms at a given rank:
/// `2n * (2^(2n-2) - 1)`.
pub fn whitehead_aut_count(rank: usize) -> u128 {
    if rank == 0 {
        return 0;
    }
    (2 * rank as u128) * ((1u128 << (2 * rank - 2)) - 1)
}

/// Enumerate every non-identity type II automorphism over `rank`
/// generators, in ascending `sort_key` order (multiplier position, then
/// support mask). Errors if `rank` exceeds `rank_guard`.
pub fn enumerate_whitehead_auts(
    rank: usize,
    rank_guard: usize,
) -> Result<impl Iterator<Item = WhiteheadAut>, FreeGroupError> {
    if rank > rank_guard || rank > MAX_ENUMERABLE_RANK {
        return Err(FreeGroupError::RankGuardExceeded {
            rank,
            guard: rank_guard.min(MAX_ENUMERABLE_RANK),
        });
    }
    let iter = (0..2 * rank).flat_map(move |mi| {
        let multiplier = Letter::from_index(mi);
        // Letter positions other than the multiplier and its inverse,
        // ascending, so that expanding a subset counter onto them is
        // monotone in the full support mask.
        let others: Vec<usize> = (0..2 * rank)
            .filter(|&i| i != mi && i != multiplier.inverse().index())
            .collect();
        let count = 1u64 << others.len();
        let others2 = others.clone();
        (1..count).map(move |subset| {
            let mut support = 1u64 << mi;
            for (bit, &pos) in others2.iter().enumerate() {
                if subset & (1 << bit) != 0 {
                    support |= 1 << pos;
                }
            }
            WhiteheadAut { rank, multiplier, support }
        })
    });
    Ok(iter)
}

/// Parse a word over `alphabet` and freely reduce it.
///
/// Grammar: whitespace- or `*`-separated tokens `name` or `name^e` with
/// integer exponent `e`; a token with an uppercase first character denotes
/// the inverse of the lowercased name.
pub fn parse_word(text: &str, alphabet: &Alphabet) -> Result<Word, FreeGroupError> {
    let mut letters = Vec::new();
    for token in text.split(|c: char| c.is_whitespace() || c == '*') {
        if token.is_empty() {
            continue;
        }
        let (base, exponent) = match token.split_once('^') {
            Some((base, exp)) => {
                if base.is_empty() {
                    return Err(FreeGroupError::EmptyExponentBase(token.to_string()));
                }
                let valid = {
                    let digits = exp.strip_prefix('-').unwrap_or(exp);
                    !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit())
                };
                if !valid {
                    return Err(FreeGroupError::MalformedExponent(token.to_string()));
                }
                let exp: i64 = exp
                    .parse()
                    .map_err(|_| FreeGroupError::MalformedExponent(token.to_string()))?;
                (base, exp)
            }
            None => (token, 1),
        };
        let mut chars = base.chars();
        let first = chars.next().ok_or_else(|| FreeGroupError::MalformedToken(token.to_string()))?;
        if !first.is_ascii_alphabetic() || !chars.all(|c| c.is_ascii_alphanumeric()) {
            return Err(FreeGroupError::MalformedToken(token.to_string()));
        }
        let inverted = first.is_ascii_uppercase();
        let name = if inverted { base.to_ascii_lowercase() } else { base.to_string() };
        let gen = alphabet
            .index_of(&name)
            .ok_or_else(|| FreeGroupError::UnknownGenerator(token.to_string()))?;
        let sign = match (inverted, exponent < 0) {
            (false, false) | (true, true) => Sign::Plus,
            _ => Sign::Minus,
        };
        for _ in 0..exponent.unsigned_abs() {
            letters.push(Letter { gen, sign });
        }
    }
    Ok(free_reduce(letters))
}
