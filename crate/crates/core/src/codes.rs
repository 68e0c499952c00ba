//! GF(2) linear algebra and the coding machinery behind key agreement:
//! parity-check codes with syndrome decoding, the greedy minimum-distance
//! construction, privacy-amplification matrices, the joint minimum weight
//! `d_w`, and the entropy-based rate formulas.
//!
//! Bit-strings are packed into `u64` words; every product is XOR/popcount.
//! The exhaustive verifications (minimum distance, coset weights) dominate
//! runtime, so caps are enforced where enumeration would explode.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;
use thiserror::Error;

/// Exhaustive-enumeration caps. Above these the operations either switch
/// strategy or refuse, rather than silently taking hours.
pub mod caps {
    /// Max `r + m` for exact joint-minimum-weight enumeration (2^(r+m) combos).
    pub const JOINT_WEIGHT: usize = 24;
    /// Max code length for exhaustive minimum-distance verification.
    pub const MIN_DISTANCE: usize = 24;
    /// Max parity rows for a precomputed coset-leader table (2^r entries).
    pub const COSET_TABLE_BITS: usize = 20;
}

#[derive(Debug, Error)]
pub enum CodeError {
    #[error("shape mismatch: expected length {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("rows are not linearly independent over GF(2)")]
    DependentRows,
    #[error("minimum distance {found} is below the required {required}")]
    DistanceTooSmall { found: usize, required: usize },
    #[error("enumeration cap exceeded: {0}; use a constructive lower bound instead")]
    CapExceeded(String),
    #[error("infeasible parameters: need {lhs} > {rhs} ({context})")]
    Infeasible { lhs: f64, rhs: f64, context: String },
    #[error("argument {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("invalid bit character {0:?}")]
    BadBitChar(char),
    #[error("block length {0} does not divide code length {1}")]
    BadBlocking(usize, usize),
}

/// Ordered bit sequence packed into 64-bit words.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        Self { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        let mut s = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b != 0 {
                s.set(i, true);
            }
        }
        s
    }

    /// Low `len` bits of `value`, bit 0 first.
    pub fn from_word(value: u64, len: usize) -> Self {
        assert!(len <= 64);
        let mut s = Self::zeros(len);
        if len > 0 {
            s.words[0] = value & mask_last(len);
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, CodeError> {
        let mut bits = Vec::with_capacity(text.len());
        for ch in text.chars() {
            match ch {
                '0' => bits.push(0),
                '1' => bits.push(1),
                other => return Err(CodeError::BadBitChar(other)),
            }
        }
        Ok(Self::from_bits(&bits))
    }

    pub fn random<R: Rng>(len: usize, rng: &mut R) -> Self {
        let mut s = Self::zeros(len);
        for w in &mut s.words {
            *w = rng.random();
        }
        s.truncate_spare();
        s
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        debug_assert!(i < self.len);
        let (w, b) = (i / 64, i % 64);
        if v {
            self.words[w] |= 1 << b;
        } else {
            self.words[w] &= !(1 << b);
        }
    }

    pub fn flip(&mut self, i: usize) {
        let (w, b) = (i / 64, i % 64);
        self.words[w] ^= 1 << b;
    }

    pub fn xor_assign(&mut self, other: &Self) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Number of ones.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Hamming distance.
    pub fn distance(&self, other: &Self) -> usize {
        assert_eq!(self.len, other.len);
        self.words.iter().zip(&other.words).map(|(a, b)| (a ^ b).count_ones() as usize).sum()
    }

    /// Parity of the AND with `other`; a GF(2) inner product.
    pub fn dot(&self, other: &Self) -> bool {
        assert_eq!(self.len, other.len);
        let ones: u32 = self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones()).sum();
        ones % 2 == 1
    }

    /// Bits at `positions`, in the given order.
    pub fn select(&self, positions: &[usize]) -> Self {
        let mut out = Self::zeros(positions.len());
        for (k, &p) in positions.iter().enumerate() {
            if self.get(p) {
                out.set(k, true);
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Compares as a bit sequence with index 0 most significant.
    pub fn lex_cmp(&self, other: &Self) -> std::cmp::Ordering {
        assert_eq!(self.len, other.len);
        for i in 0..self.len {
            match (self.get(i), other.get(i)) {
                (false, true) => return std::cmp::Ordering::Less,
                (true, false) => return std::cmp::Ordering::Greater,
                _ => {}
            }
        }
        std::cmp::Ordering::Equal
    }

    pub fn to_bit_string(&self) -> String {
        (0..self.len).map(|i| if self.get(i) { '1' } else { '0' }).collect()
    }

    /// Hex packing, low bit of each nibble first; used in transcript dumps.
    pub fn to_hex(&self) -> String {
        let mut out = String::with_capacity(self.len.div_ceil(4));
        for chunk in 0..self.len.div_ceil(4) {
            let mut nibble = 0u8;
            for b in 0..4 {
                let idx = chunk * 4 + b;
                if idx < self.len && self.get(idx) {
                    nibble |= 1 << b;
                }
            }
            out.push(char::from_digit(nibble as u32, 16).unwrap());
        }
        out
    }

    /// Value of the low 64 bits; only meaningful for short strings.
    pub fn as_word(&self) -> u64 {
        assert!(self.len <= 64);
        self.words.first().copied().unwrap_or(0)
    }

    fn truncate_spare(&mut self) {
        if !self.len.is_multiple_of(64) {
            if let Some(last) = self.words.last_mut() {
                *last &= mask_last(self.len % 64);
            }
        }
    }
}

fn mask_last(bits: usize) -> u64 {
    if bits == 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

impl Serialize for BitString {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_bit_string().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Self::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Dense GF(2) matrix stored as one packed row per entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Gf2Matrix {
    rows: Vec<BitString>,
    cols: usize,
}

impl Gf2Matrix {
    pub fn new(rows: Vec<BitString>, cols: usize) -> Self {
        for r in &rows {
            assert_eq!(r.len(), cols, "row width mismatch");
        }
        Self { rows, cols }
    }

    pub fn empty(cols: usize) -> Self {
        Self { rows: Vec::new(), cols }
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| {
                let mut r = BitString::zeros(n);
                r.set(i, true);
                r
            })
            .collect();
        Self { rows, cols: n }
    }

    pub fn parse_rows(rows: &[&str]) -> Result<Self, CodeError> {
        let parsed: Result<Vec<BitString>, _> = rows.iter().map(|r| BitString::parse(r)).collect();
        let parsed = parsed?;
        let cols = parsed.first().map_or(0, BitString::len);
        for r in &parsed {
            if r.len() != cols {
                return Err(CodeError::ShapeMismatch { expected: cols, got: r.len() });
            }
        }
        Ok(Self { rows: parsed, cols })
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &BitString {
        &self.rows[i]
    }

    pub fn row_slice(&self) -> &[BitString] {
        &self.rows
    }

    pub fn push_row(&mut self, row: BitString) {
        assert_eq!(row.len(), self.cols);
        self.rows.push(row);
    }

    /// Vertical stack: `self` on top of `other`.
    pub fn stack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        Self { rows, cols: self.cols }
    }

    /// Rank by Gaussian elimination on a copy.
    pub fn rank(&self) -> usize {
        let mut work: Vec<BitString> = self.rows.clone();
        let mut rank = 0;
        for col in 0..self.cols {
            let Some(pivot) = (rank..work.len()).find(|&r| work[r].get(col)) else {
                continue;
            };
            work.swap(rank, pivot);
            let pivot_row = work[rank].clone();
            for (r, row) in work.iter_mut().enumerate() {
                if r != rank && row.get(col) {
                    row.xor_assign(&pivot_row);
                }
            }
            rank += 1;
            if rank == work.len() {
                break;
            }
        }
        rank
    }

    pub fn has_independent_rows(&self) -> bool {
        self.rank() == self.rows.len()
    }

    /// Basis of `{x : Mx = 0}`, deterministic (free columns in index order).
    pub fn null_space(&self) -> Vec<BitString> {
        let n = self.cols;
        let mut work: Vec<BitString> = self.rows.clone();
        let mut pivot_col_of_row: Vec<usize> = Vec::new();
        let mut rank = 0usize;
        for col in 0..n {
            let Some(pivot) = (rank..work.len()).find(|&r| work[r].get(col)) else {
                continue;
            };
            work.swap(rank, pivot);
            let pivot_row = work[rank].clone();
            for (r, row) in work.iter_mut().enumerate() {
                if r != rank && row.get(col) {
                    row.xor_assign(&pivot_row);
                }
            }
            pivot_col_of_row.push(col);
            rank += 1;
        }
        let pivot_set: std::collections::HashSet<usize> = pivot_col_of_row.iter().copied().collect();
        let mut basis = Vec::with_capacity(n - rank);
        for free in 0..n {
            if pivot_set.contains(&free) {
                continue;
            }
            let mut v = BitString::zeros(n);
            v.set(free, true);
            for (row_idx, &pc) in pivot_col_of_row.iter().enumerate() {
                if work[row_idx].get(free) {
                    v.set(pc, true);
                }
            }
            basis.push(v);
        }
        basis
    }

    pub fn to_row_strings(&self) -> Vec<String> {
        self.rows.iter().map(BitString::to_bit_string).collect()
    }
}

/// GF(2) matrix-vector product: `result[i] = parity(row_i AND v)`.
pub fn gf2_matvec(m: &Gf2Matrix, v: &BitString) -> Result<BitString, CodeError> {
    if m.cols() != v.len() {
        return Err(CodeError::ShapeMismatch { expected: m.cols(), got: v.len() });
    }
    let mut out = BitString::zeros(m.rows());
    for (i, row) in m.row_slice().iter().enumerate() {
        if row.dot(v) {
            out.set(i, true);
        }
    }
    Ok(out)
}

impl Serialize for Gf2Matrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_row_strings().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Gf2Matrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows: Vec<String> = Vec::deserialize(deserializer)?;
        let refs: Vec<&str> = rows.iter().map(String::as_str).collect();
        Gf2Matrix::parse_rows(&refs).map_err(serde::de::Error::custom)
    }
}

/// Exact minimum over all combinations of rows of `f` and `k` that use at
/// least one `k` row. Enumerates `2^r * (2^m - 1)` combinations.
pub fn joint_min_weight(f: &Gf2Matrix, k: &Gf2Matrix) -> Result<usize, CodeError> {
    if f.cols() != k.cols() {
        return Err(CodeError::ShapeMismatch { expected: f.cols(), got: k.cols() });
    }
    if k.rows() == 0 {
        return Err(CodeError::Infeasible {
            lhs: 0.0,
            rhs: 1.0,
            context: "joint minimum weight needs at least one K row".into(),
        });
    }
    let (r, m) = (f.rows(), k.rows());
    if r + m > caps::JOINT_WEIGHT {
        return Err(CodeError::CapExceeded(format!(
            "r + m = {} exceeds {}",
            r + m,
            caps::JOINT_WEIGHT
        )));
    }
    if !f.stack(k).has_independent_rows() {
        return Err(CodeError::DependentRows);
    }
    let mut best = usize::MAX;
    // Gray-code walk over K masks (outer) and F masks (inner): one row XOR per step.
    let mut k_acc = BitString::zeros(k.cols());
    for km in 1u64..(1 << m) {
        let flip = (gray(km) ^ gray(km - 1)).trailing_zeros() as usize;
        k_acc.xor_assign(k.row(flip));
        best = best.min(k_acc.weight());
        let mut f_acc = k_acc.clone();
        for fm in 1u64..(1 << r) {
            let fflip = (gray(fm) ^ gray(fm - 1)).trailing_zeros() as usize;
            f_acc.xor_assign(f.row(fflip));
            best = best.min(f_acc.weight());
        }
    }
    Ok(best)
}

#[inline]
fn gray(x: u64) -> u64 {
    x ^ (x >> 1)
}

/// Seeded bijection on `[0, 2^n)`: a few Feistel-style rounds keyed by the
/// seed. Gives the greedy constructions a reproducible pseudo-random scan
/// order without materializing a permutation.
struct BitPermutation {
    n: usize,
    keys: [u64; 4],
}

impl BitPermutation {
    fn new(n: usize, seed: u64) -> Self {
        let mut keys = [0u64; 4];
        let mut state = seed;
        for k in &mut keys {
            state = splitmix64(state);
            *k = state;
        }
        Self { n, keys }
    }

    fn apply(&self, x: u64) -> u64 {
        if self.n < 2 {
            return x;
        }
        let half = self.n / 2;
        let lo_bits = half;
        let hi_bits = self.n - half;
        let lo_mask = mask_last(lo_bits);
        let hi_mask = mask_last(hi_bits);
        let mut lo = x & lo_mask;
        let mut hi = (x >> lo_bits) & hi_mask;
        for key in self.keys {
            let f = splitmix64(hi ^ key) & lo_mask;
            let new_lo = (lo ^ f) & lo_mask;
            // Unbalanced halves swap widths each round only if equal; keep fixed.
            lo = new_lo;
            let g = splitmix64(lo ^ key.rotate_left(17)) & hi_mask;
            hi = (hi ^ g) & hi_mask;
        }
        (hi << lo_bits) | lo
    }
}

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// How a code's syndrome decoder runs.
#[derive(Debug, Clone, PartialEq)]
enum DecoderKind {
    /// Coset-leader lookup (small `r`) or bounded-weight search.
    General,
    /// Per-block two-candidate decoding for the block-repetition code.
    BlockRepetition { block_len: usize },
}

/// Binary linear code given by a parity-check matrix with independent rows,
/// together with the number of errors `t_max` it corrects.
#[derive(Debug, Clone)]
pub struct LinearCode {
    parity_check: Gf2Matrix,
    t_max: usize,
    decoder: DecoderKind,
    coset_table: OnceLock<Vec<(u8, u64)>>,
}

impl LinearCode {
    /// Wraps an explicit parity-check matrix. The claimed `t_max` is verified
    /// exhaustively when `n` is within the enumeration cap.
    pub fn from_parity_check(parity_check: Gf2Matrix, t_max: usize) -> Result<Self, CodeError> {
        if !parity_check.has_independent_rows() {
            return Err(CodeError::DependentRows);
        }
        let code = Self {
            parity_check,
            t_max,
            decoder: DecoderKind::General,
            coset_table: OnceLock::new(),
        };
        if code.length() <= caps::MIN_DISTANCE && code.dimension() > 0 {
            let d = code.minimum_distance()?;
            if d < 2 * t_max + 1 {
                return Err(CodeError::DistanceTooSmall { found: d, required: 2 * t_max + 1 });
            }
        }
        Ok(code)
    }

    /// The length-`blocks * block_len` code whose codewords are constant on
    /// each block. Minimum distance is `block_len`; decoding is per-block and
    /// stays cheap at any length, which makes this the workhorse for long
    /// protocol sessions.
    pub fn block_repetition(blocks: usize, block_len: usize) -> Result<Self, CodeError> {
        assert!(blocks >= 1 && block_len >= 2);
        let n = blocks * block_len;
        let mut rows = Vec::with_capacity(blocks * (block_len - 1));
        for b in 0..blocks {
            for j in 0..block_len - 1 {
                let mut row = BitString::zeros(n);
                row.set(b * block_len + j, true);
                row.set(b * block_len + j + 1, true);
                rows.push(row);
            }
        }
        Ok(Self {
            parity_check: Gf2Matrix::new(rows, n),
            t_max: (block_len - 1) / 2,
            decoder: DecoderKind::BlockRepetition { block_len },
            coset_table: OnceLock::new(),
        })
    }

    pub fn parity_check(&self) -> &Gf2Matrix {
        &self.parity_check
    }

    pub fn t_max(&self) -> usize {
        self.t_max
    }

    /// Code length `n`.
    pub fn length(&self) -> usize {
        self.parity_check.cols()
    }

    /// Number of parity rows `r`.
    pub fn redundancy(&self) -> usize {
        self.parity_check.rows()
    }

    /// Code dimension `k = n - r`.
    pub fn dimension(&self) -> usize {
        self.length() - self.redundancy()
    }

    /// Generator rows: a basis of the null space of the parity check.
    pub fn generator(&self) -> Gf2Matrix {
        Gf2Matrix::new(self.parity_check.null_space(), self.length())
    }

    pub fn syndrome(&self, v: &BitString) -> Result<BitString, CodeError> {
        gf2_matvec(&self.parity_check, v)
    }

    /// Exhaustive minimum distance over all nonzero codewords.
    pub fn minimum_distance(&self) -> Result<usize, CodeError> {
        let k = self.dimension();
        if k == 0 {
            return Ok(usize::MAX);
        }
        if self.length() > caps::MIN_DISTANCE {
            return Err(CodeError::CapExceeded(format!(
                "length {} exceeds {} for exhaustive distance",
                self.length(),
                caps::MIN_DISTANCE
            )));
        }
        let gen = self.generator();
        let mut acc = BitString::zeros(self.length());
        let mut best = usize::MAX;
        for mask in 1u64..(1 << k) {
            let flip = (gray(mask) ^ gray(mask - 1)).trailing_zeros() as usize;
            acc.xor_assign(gen.row(flip));
            best = best.min(acc.weight());
        }
        Ok(best)
    }

    fn coset_table(&self) -> &Vec<(u8, u64)> {
        self.coset_table.get_or_init(|| {
            let r = self.redundancy();
            let n = self.length();
            assert!(r <= caps::COSET_TABLE_BITS && n <= 64);
            // Column syndromes as r-bit words.
            let cols: Vec<u64> = (0..n)
                .map(|j| {
                    let mut s = 0u64;
                    for (i, row) in self.parity_check.row_slice().iter().enumerate() {
                        if row.get(j) {
                            s |= 1 << i;
                        }
                    }
                    s
                })
                .collect();
            let mut table: Vec<(u8, u64)> = vec![(u8::MAX, 0); 1 << r];
            let mut filled = 0usize;
            table[0] = (0, 0);
            filled += 1;
            // Error patterns in (weight, lexicographic-pattern) order; the
            // first hit per syndrome is the canonical coset leader.
            'outer: for w in 1..=n {
                let mut combo: Vec<usize> = (0..w).collect();
                loop {
                    let mut syn = 0u64;
                    let mut pattern = 0u64;
                    for &p in &combo {
                        syn ^= cols[p];
                        pattern |= 1 << p;
                    }
                    let entry = &mut table[syn as usize];
                    if entry.0 == u8::MAX {
                        *entry = (w as u8, pattern);
                        filled += 1;
                        if filled == table.len() {
                            break 'outer;
                        }
                    }
                    // Next combination.
                    let mut i = w;
                    loop {
                        if i == 0 {
                            break;
                        }
                        i -= 1;
                        if combo[i] < n - (w - i) {
                            combo[i] += 1;
                            for j in i + 1..w {
                                combo[j] = combo[j - 1] + 1;
                            }
                            break;
                        }
                        if i == 0 {
                            combo.clear();
                            break;
                        }
                    }
                    if combo.is_empty() {
                        break;
                    }
                }
                if filled == table.len() {
                    break;
                }
            }
            table
        })
    }
}

/// Minimal-distance syndrome decoding: the `x` with `Hx = s` closest to `y`.
///
/// Within a distance tie the lexicographically smallest `x` wins whenever the
/// tied patterns are enumerable; otherwise the canonical coset leader
/// (smallest error pattern) is used.
pub fn syndrome_decode(y: &BitString, s: &BitString, code: &LinearCode) -> Result<BitString, CodeError> {
    let n = code.length();
    if y.len() != n {
        return Err(CodeError::ShapeMismatch { expected: n, got: y.len() });
    }
    if s.len() != code.redundancy() {
        return Err(CodeError::ShapeMismatch { expected: code.redundancy(), got: s.len() });
    }
    match &code.decoder {
        DecoderKind::BlockRepetition { block_len } => decode_block_repetition(y, s, *block_len),
        DecoderKind::General => decode_general(y, s, code),
    }
}

fn decode_block_repetition(y: &BitString, s: &BitString, block_len: usize) -> Result<BitString, CodeError> {
    let n = y.len();
    if !n.is_multiple_of(block_len) {
        return Err(CodeError::BadBlocking(block_len, n));
    }
    let blocks = n / block_len;
    let mut x = BitString::zeros(n);
    for b in 0..blocks {
        // Within a block the syndrome pins adjacent parities, so the two
        // candidates are a prefix-xor chain and its complement.
        let base = b * block_len;
        let mut cand = vec![false; block_len];
        for j in 1..block_len {
            cand[j] = cand[j - 1] ^ s.get(b * (block_len - 1) + j - 1);
        }
        let dist0 = cand.iter().enumerate().filter(|&(j, &c)| c != y.get(base + j)).count();
        let dist1 = block_len - dist0;
        // Tie goes to the candidate starting with 0: lexicographically smaller.
        let use_complement = dist1 < dist0;
        for (j, &c) in cand.iter().enumerate() {
            x.set(base + j, c ^ use_complement);
        }
    }
    Ok(x)
}

fn decode_general(y: &BitString, s: &BitString, code: &LinearCode) -> Result<BitString, CodeError> {
    let n = code.length();
    let r = code.redundancy();
    // Residual syndrome of the error pattern e = x + y.
    let u = code.syndrome(y)?.xor(s);
    if n <= 64 && r <= caps::COSET_TABLE_BITS {
        let table = code.coset_table();
        let (w, _) = table[u.as_word() as usize];
        if w == u8::MAX {
            // Unreachable for a full-rank parity check, every syndrome has a coset.
            return Err(CodeError::DependentRows);
        }
        let e = best_error_of_weight(&u, y, w as usize, code)
            .expect("coset table guarantees a pattern of this weight exists");
        return Ok(y.xor(&e));
    }
    // Bounded-weight search, extended past t_max until a coset member appears.
    for w in 0..=n {
        if let Some(e) = best_error_of_weight(&u, y, w, code) {
            return Ok(y.xor(&e));
        }
    }
    Err(CodeError::DependentRows)
}

/// Among error patterns of exactly `weight` whose syndrome is `u`, picks the
/// one minimizing `y xor e` lexicographically. Returns `None` if there is no
/// such pattern.
fn best_error_of_weight(
    u: &BitString,
    y: &BitString,
    weight: usize,
    code: &LinearCode,
) -> Option<BitString> {
    let n = code.length();
    if weight == 0 {
        return u.is_zero().then(|| BitString::zeros(n));
    }
    if weight > n {
        return None;
    }
    let mut best: Option<BitString> = None;
    let mut combo: Vec<usize> = (0..weight).collect();
    let mut e = BitString::zeros(n);
    loop {
        for &p in &combo {
            e.set(p, true);
        }
        if code.syndrome(&e).expect("widths agree") == *u {
            let x = y.xor(&e);
            let better = match &best {
                None => true,
                Some(b) => x.lex_cmp(b) == std::cmp::Ordering::Less,
            };
            if better {
                best = Some(x);
            }
        }
        for &p in &combo {
            e.set(p, false);
        }
        // Next combination of `weight` positions.
        let mut i = weight;
        let mut advanced = false;
        while i > 0 {
            i -= 1;
            if combo[i] < n - (weight - i) {
                combo[i] += 1;
                for j in i + 1..weight {
                    combo[j] = combo[j - 1] + 1;
                }
                advanced = true;
                break;
            }
        }
        if !advanced {
            break;
        }
    }
    best.map(|x| x.xor(y))
}

/// Smallest `r` with `2^(r+1) > sum_{i<=2t} C(n, i)`, then a greedy span
/// construction keeping every nonzero combination at weight `>= 2t + 1`.
/// Candidate order is a seeded pseudo-random permutation, so codes are
/// reproducible per seed.
pub fn gilbert_varshamov_construct(n: usize, t: usize, rng_seed: u64) -> Result<LinearCode, CodeError> {
    assert!(n >= 1 && t >= 1);
    if n > caps::MIN_DISTANCE {
        return Err(CodeError::CapExceeded(format!(
            "length {n} exceeds {} for the greedy construction",
            caps::MIN_DISTANCE
        )));
    }
    let ball: u128 = (0..=2 * t).map(|i| binomial(n as u64, i as u64)).sum();
    let mut r = 0usize;
    while (1u128 << (r + 1)) <= ball {
        r += 1;
    }
    let k = n as isize - r as isize;
    if k < 1 || 2 * t + 1 > n {
        return Err(CodeError::Infeasible {
            lhs: n as f64,
            rhs: r as f64,
            context: format!("no room for code dimension: n = {n}, required redundancy r = {r}"),
        });
    }
    let k = k as usize;
    let required = 2 * t + 1;
    let perm = BitPermutation::new(n, rng_seed);
    let total: u64 = 1u64 << n;

    let mut gen_rows: Vec<BitString> = Vec::with_capacity(k);
    let mut span: Vec<BitString> = vec![BitString::zeros(n)];
    for idx in 0..total {
        let candidate_bits = perm.apply(idx);
        if candidate_bits == 0 {
            continue;
        }
        let candidate = BitString::from_word(candidate_bits, n);
        if gen_rows.is_empty() && candidate.weight() != required {
            // The first generator row is pinned at the target weight.
            continue;
        }
        let ok = span.iter().all(|s| {
            let w = s.distance(&candidate);
            w >= required
        });
        if !ok {
            continue;
        }
        // Extend the span with candidate + everything already there.
        let mut extension: Vec<BitString> = span.iter().map(|s| s.xor(&candidate)).collect();
        span.append(&mut extension);
        gen_rows.push(candidate);
        if gen_rows.len() == k {
            break;
        }
    }
    if gen_rows.len() < k {
        // The counting bound guarantees success; reaching this means a bug.
        return Err(CodeError::Infeasible {
            lhs: gen_rows.len() as f64,
            rhs: k as f64,
            context: "greedy span construction stalled".into(),
        });
    }
    let generator = Gf2Matrix::new(gen_rows, n);
    let parity_rows = generator.null_space();
    debug_assert_eq!(parity_rows.len(), r);
    let code = LinearCode::from_parity_check(Gf2Matrix::new(parity_rows, n), t)?;
    Ok(code)
}

/// Privacy-amplification matrix paired with the parity check it was built
/// against: `d_w` is the minimum weight over row combinations that use at
/// least one `K` row.
#[derive(Debug, Clone)]
pub struct PrivacyAmplifier {
    k_matrix: Gf2Matrix,
    d_w: usize,
}

impl PrivacyAmplifier {
    /// Wraps an explicit matrix; `d_w` is recomputed exhaustively against `f`
    /// when within cap, otherwise the claimed bound is required up front.
    pub fn from_matrix(k_matrix: Gf2Matrix, f: &Gf2Matrix, claimed_d_w: Option<usize>) -> Result<Self, CodeError> {
        if k_matrix.rows() == 0 {
            return Ok(Self { k_matrix, d_w: usize::MAX });
        }
        if !f.stack(&k_matrix).has_independent_rows() {
            return Err(CodeError::DependentRows);
        }
        let d_w = if f.rows() + k_matrix.rows() <= caps::JOINT_WEIGHT {
            joint_min_weight(f, &k_matrix)?
        } else {
            claimed_d_w.ok_or_else(|| {
                CodeError::CapExceeded("d_w not enumerable; a certified lower bound is required".into())
            })?
        };
        Ok(Self { k_matrix, d_w })
    }

    pub fn matrix(&self) -> &Gf2Matrix {
        &self.k_matrix
    }

    pub fn rows(&self) -> usize {
        self.k_matrix.rows()
    }

    pub fn d_w(&self) -> usize {
        self.d_w
    }

    pub fn compress(&self, v: &BitString) -> Result<BitString, CodeError> {
        gf2_matvec(&self.k_matrix, v)
    }
}

/// Greedy coset search for `m` rows to stack on `f` such that every
/// combination using a new row has weight `>= d_min`. Feasible when
/// `2^(n - r - m + 1) > sum_{i < d_min} C(n, i)`.
pub fn build_privacy_matrix(
    f: &Gf2Matrix,
    d_min: usize,
    m: usize,
    rng_seed: u64,
) -> Result<PrivacyAmplifier, CodeError> {
    let n = f.cols();
    let r = f.rows();
    if m == 0 {
        return PrivacyAmplifier::from_matrix(Gf2Matrix::empty(n), f, None);
    }
    if n > caps::MIN_DISTANCE {
        return Err(CodeError::CapExceeded(format!(
            "length {n} exceeds {} for the coset search; use the block-pattern construction",
            caps::MIN_DISTANCE
        )));
    }
    let ball: u128 = (0..d_min as u64).map(|i| binomial(n as u64, i)).sum();
    let exponent = n as isize - r as isize - m as isize + 1;
    let feasible = exponent > 0 && (1u128 << exponent.min(127)) > ball;
    if !feasible {
        return Err(CodeError::Infeasible {
            lhs: if exponent > 0 { (1u128 << exponent.min(127)) as f64 } else { 0.0 },
            rhs: ball as f64,
            context: format!("2^(n-r-m+1) must exceed the radius-{} ball", d_min.saturating_sub(1)),
        });
    }

    // Span of F as explicit words for the acceptance scan.
    let perm = BitPermutation::new(n, rng_seed.wrapping_add(0xA5A5));
    let mut chosen: Vec<BitString> = Vec::with_capacity(m);
    let mut span: Vec<BitString> = {
        let mut s = vec![BitString::zeros(n)];
        for row in f.row_slice() {
            let mut ext: Vec<BitString> = s.iter().map(|x| x.xor(row)).collect();
            s.append(&mut ext);
        }
        s
    };
    for idx in 0..(1u64 << n) {
        let bits = perm.apply(idx);
        if bits == 0 {
            continue;
        }
        let w = BitString::from_word(bits, n);
        // Accept when the entire coset w + span stays outside the light ball.
        if span.iter().all(|x| x.distance(&w) >= d_min) {
            let mut ext: Vec<BitString> = span.iter().map(|x| x.xor(&w)).collect();
            span.append(&mut ext);
            chosen.push(w);
            if chosen.len() == m {
                break;
            }
        }
    }
    if chosen.len() < m {
        return Err(CodeError::Infeasible {
            lhs: chosen.len() as f64,
            rhs: m as f64,
            context: "coset search stalled".into(),
        });
    }
    PrivacyAmplifier::from_matrix(Gf2Matrix::new(chosen, n), f, None)
}

/// Privacy rows for the block-repetition code: each row places a single one
/// in every block selected by an inner pattern, so a combination's coset
/// weight equals its inner-pattern weight and `d_w` is exactly the inner
/// code's minimum distance (enumerated over all `2^m` pattern combinations).
pub fn build_block_pattern_privacy(
    blocks: usize,
    block_len: usize,
    m: usize,
    d_min: usize,
    rng_seed: u64,
) -> Result<PrivacyAmplifier, CodeError> {
    assert!(m >= 1);
    if blocks > 127 {
        return Err(CodeError::CapExceeded("at most 127 blocks supported".into()));
    }
    if d_min > blocks {
        return Err(CodeError::Infeasible {
            lhs: blocks as f64,
            rhs: d_min as f64,
            context: "inner pattern distance cannot exceed the block count".into(),
        });
    }
    if m > 20 {
        return Err(CodeError::CapExceeded("inner pattern rank above 20".into()));
    }
    // Greedy inner pattern span over F_2^blocks with min weight >= d_min.
    // Small spaces get a seeded exhaustive scan (success guaranteed whenever
    // possible); large ones draw random candidates, which succeed quickly
    // because the light ball is a vanishing fraction of the space.
    let mut patterns: Vec<u128> = Vec::with_capacity(m);
    let mut span: Vec<u128> = vec![0];
    let weight_ok =
        |span: &[u128], cand: u128| span.iter().all(|&s| (s ^ cand).count_ones() as usize >= d_min);
    if blocks <= 24 {
        let perm = BitPermutation::new(blocks, rng_seed.wrapping_add(0x5A5A));
        for idx in 0..(1u64 << blocks) {
            let cand = perm.apply(idx) as u128;
            if cand == 0 {
                continue;
            }
            if weight_ok(&span, cand) {
                let mut ext: Vec<u128> = span.iter().map(|&s| s ^ cand).collect();
                span.append(&mut ext);
                patterns.push(cand);
                if patterns.len() == m {
                    break;
                }
            }
        }
    } else {
        let mut state = rng_seed.wrapping_add(0x5A5A);
        let mask: u128 = (1u128 << blocks) - 1;
        const ATTEMPTS: u64 = 200_000;
        for _ in 0..ATTEMPTS {
            state = splitmix64(state);
            let hi = splitmix64(state) as u128;
            let cand = ((hi << 64) | splitmix64(state ^ 0xABCD) as u128) & mask;
            if cand == 0 {
                continue;
            }
            if weight_ok(&span, cand) {
                let mut ext: Vec<u128> = span.iter().map(|&s| s ^ cand).collect();
                span.append(&mut ext);
                patterns.push(cand);
                if patterns.len() == m {
                    break;
                }
            }
        }
    }
    if patterns.len() < m {
        return Err(CodeError::Infeasible {
            lhs: patterns.len() as f64,
            rhs: m as f64,
            context: format!("no {m} patterns of pairwise-span weight {d_min} over {blocks} blocks"),
        });
    }
    let n = blocks * block_len;
    let rows: Vec<BitString> = patterns
        .iter()
        .map(|&p| {
            let mut row = BitString::zeros(n);
            for b in 0..blocks {
                if (p >> b) & 1 == 1 {
                    row.set(b * block_len, true);
                }
            }
            row
        })
        .collect();
    // d_w = inner span minimum weight, exact by enumeration.
    let mut d_w = usize::MAX;
    for mask in 1u64..(1 << m) {
        let mut acc = 0u128;
        for (j, &p) in patterns.iter().enumerate() {
            if (mask >> j) & 1 == 1 {
                acc ^= p;
            }
        }
        d_w = d_w.min(acc.count_ones() as usize);
    }
    let k_matrix = Gf2Matrix::new(rows, n);
    Ok(PrivacyAmplifier { k_matrix, d_w })
}

/// Binary entropy `H2(x)` in bits, with `H2(0) = H2(1) = 0` by continuity.
pub fn binary_entropy(x: f64) -> Result<f64, CodeError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(CodeError::OutOfRange(x));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(0.0);
    }
    Ok(-(x * x.log2() + (1.0 - x) * (1.0 - x).log2()))
}

/// Worst-case asymptotic key rate
/// `1 - H2(2(d + e)) - H2(2(d + b + g/2 + 3e/2))`.
pub fn asymptotic_rate(delta_p: f64, eps: f64, beta_qp: f64, gamma_qp: f64) -> Result<f64, CodeError> {
    let x1 = 2.0 * (delta_p + eps);
    let x2 = 2.0 * (delta_p + beta_qp + 0.5 * gamma_qp + 1.5 * eps);
    if !(0.0..=1.0).contains(&x1) {
        return Err(CodeError::OutOfRange(x1));
    }
    if !(0.0..=1.0).contains(&x2) {
        return Err(CodeError::OutOfRange(x2));
    }
    Ok(1.0 - binary_entropy(x1)? - binary_entropy(x2)?)
}

/// Exact binomial coefficient in wide arithmetic (valid for n <= 64).
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Exact partial binomial sum against its entropy bound `2^(n H2(mu))`.
pub fn binomial_sum_bound_check(mu: f64, n: u64) -> Result<(u128, f64), CodeError> {
    if !(mu > 0.0 && mu < 0.5) {
        return Err(CodeError::OutOfRange(mu));
    }
    assert!((1..=64).contains(&n), "exact summation supports n <= 64");
    let cutoff = (mu * n as f64).floor() as u64;
    let exact: u128 = (0..=cutoff).map(|k| binomial(n, k)).sum();
    let bound = (n as f64 * binary_entropy(mu)?).exp2();
    Ok((exact, bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matvec_identity() {
        let m = Gf2Matrix::identity(5);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = BitString::random(5, &mut rng);
        assert_eq!(gf2_matvec(&m, &v).unwrap(), v);
    }

    #[test]
    fn matvec_parity_of_two_ones() {
        let m = Gf2Matrix::parse_rows(&["110"]).unwrap();
        let v = BitString::parse("110").unwrap();
        let out = gf2_matvec(&m, &v).unwrap();
        assert!(!out.get(0));
    }

    #[test]
    fn matvec_matches_integer_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let rows = 4;
            let cols = 9;
            let m = Gf2Matrix::new((0..rows).map(|_| BitString::random(cols, &mut rng)).collect(), cols);
            let v = BitString::random(cols, &mut rng);
            let got = gf2_matvec(&m, &v).unwrap();
            for i in 0..rows {
                let mut acc = 0u32;
                for j in 0..cols {
                    acc += (m.row(i).get(j) as u32) * (v.get(j) as u32);
                }
                assert_eq!(got.get(i), acc % 2 == 1);
            }
        }
    }

    #[test]
    fn joint_weight_small_cases() {
        let f = Gf2Matrix::parse_rows(&["110"]).unwrap();
        let k = Gf2Matrix::parse_rows(&["111"]).unwrap();
        assert_eq!(joint_min_weight(&f, &k).unwrap(), 1);

        let f_empty = Gf2Matrix::empty(3);
        assert_eq!(joint_min_weight(&f_empty, &k).unwrap(), 3);

        let f2 = Gf2Matrix::parse_rows(&["1000", "0100"]).unwrap();
        let k2 = Gf2Matrix::parse_rows(&["0011"]).unwrap();
        assert_eq!(joint_min_weight(&f2, &k2).unwrap(), 2);
    }

    #[test]
    fn joint_weight_rejects_dependent_rows() {
        let f = Gf2Matrix::parse_rows(&["110"]).unwrap();
        let k = Gf2Matrix::parse_rows(&["110"]).unwrap();
        assert!(matches!(joint_min_weight(&f, &k), Err(CodeError::DependentRows)));
    }

    #[test]
    fn gv_7_3_code() {
        let code = gilbert_varshamov_construct(7, 1, 42).unwrap();
        assert_eq!(code.redundancy(), 4);
        assert_eq!(code.dimension(), 3);
        assert!(code.minimum_distance().unwrap() >= 3);
    }

    #[test]
    fn gv_3_1_is_the_repetition_code() {
        // ball(2) = 7 < 2^(2+1), so r = 2 and the only (3, 1) code with
        // distance 3 is the repetition code.
        let code = gilbert_varshamov_construct(3, 1, 1).unwrap();
        assert_eq!(code.redundancy(), 2);
        assert_eq!(code.dimension(), 1);
        assert_eq!(code.minimum_distance().unwrap(), 3);
    }

    #[test]
    fn gv_infeasible_when_redundancy_fills_the_length() {
        // n = 4, t = 2: the ball covers all of F_2^4, forcing r = n.
        assert!(matches!(
            gilbert_varshamov_construct(4, 2, 1),
            Err(CodeError::Infeasible { .. })
        ));
    }

    #[test]
    fn gv_distance_always_certified() {
        for (n, t, seed) in [(7usize, 1usize, 3u64), (10, 1, 9), (12, 2, 5), (15, 2, 8)] {
            let code = gilbert_varshamov_construct(n, t, seed).unwrap();
            let d = code.minimum_distance().unwrap();
            assert!(d > 2 * t, "n={n} t={t}: d={d}");
            // Redundancy respects the entropy form of the counting bound.
            let rate_bound = binary_entropy(2.0 * t as f64 / n as f64).unwrap() + 2.0 / n as f64;
            assert!(code.redundancy() as f64 / n as f64 <= rate_bound + 1e-12);
        }
    }

    #[test]
    fn gv_seed_changes_code_reproducibly() {
        let a1 = gilbert_varshamov_construct(10, 1, 7).unwrap();
        let a2 = gilbert_varshamov_construct(10, 1, 7).unwrap();
        assert_eq!(a1.parity_check().to_row_strings(), a2.parity_check().to_row_strings());
    }

    #[test]
    fn decode_zero_error_roundtrip() {
        let code = gilbert_varshamov_construct(7, 1, 42).unwrap();
        let gen = code.generator();
        for mask in 0u64..(1 << gen.rows()) {
            let mut x = BitString::zeros(7);
            for j in 0..gen.rows() {
                if (mask >> j) & 1 == 1 {
                    x.xor_assign(gen.row(j));
                }
            }
            let s = code.syndrome(&x).unwrap();
            assert_eq!(syndrome_decode(&x, &s, &code).unwrap(), x);
        }
    }

    #[test]
    fn decode_corrects_all_single_errors() {
        let code = gilbert_varshamov_construct(7, 1, 42).unwrap();
        let gen = code.generator();
        for mask in 0u64..(1 << gen.rows()) {
            let mut x = BitString::zeros(7);
            for j in 0..gen.rows() {
                if (mask >> j) & 1 == 1 {
                    x.xor_assign(gen.row(j));
                }
            }
            let s = code.syndrome(&x).unwrap();
            for pos in 0..7 {
                let mut y = x.clone();
                y.flip(pos);
                assert_eq!(syndrome_decode(&y, &s, &code).unwrap(), x, "pos {pos}");
            }
        }
    }

    #[test]
    fn decode_beyond_t_max_still_returns_coset_member() {
        let code = gilbert_varshamov_construct(7, 1, 42).unwrap();
        let x = BitString::zeros(7);
        let s = code.syndrome(&x).unwrap();
        let mut y = x.clone();
        y.flip(0);
        y.flip(3);
        let decoded = syndrome_decode(&y, &s, &code).unwrap();
        assert_eq!(code.syndrome(&decoded).unwrap(), s);
        // A weight-2 error may decode to a different codeword; both lie in the coset.
    }

    #[test]
    fn block_repetition_decoding() {
        let code = LinearCode::block_repetition(4, 5).unwrap();
        assert_eq!(code.t_max(), 2);
        assert_eq!(code.length(), 20);
        // The lightest nonzero codeword is a single all-ones block.
        assert_eq!(code.minimum_distance().unwrap(), 5);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let gen_patterns = [0b0000u8, 0b1010, 0b1111, 0b001];
        for &pat in &gen_patterns {
            let mut x = BitString::zeros(20);
            for b in 0..4 {
                if (pat >> b) & 1 == 1 {
                    for j in 0..5 {
                        x.set(b * 5 + j, true);
                    }
                }
            }
            let s = code.syndrome(&x).unwrap();
            for _ in 0..20 {
                let mut y = x.clone();
                let mut positions: Vec<usize> = (0..20).collect();
                for i in 0..2 {
                    let j = i + (rng.random::<u32>() as usize) % (20 - i);
                    positions.swap(i, j);
                    y.flip(positions[i]);
                }
                assert_eq!(syndrome_decode(&y, &s, &code).unwrap(), x);
            }
        }
    }

    #[test]
    fn privacy_matrix_infeasible_case() {
        let code = gilbert_varshamov_construct(7, 1, 42).unwrap();
        let err = build_privacy_matrix(code.parity_check(), 2, 1, 5).unwrap_err();
        assert!(matches!(err, CodeError::Infeasible { .. }));
    }

    #[test]
    fn privacy_matrix_feasible_exhaustive() {
        let f = Gf2Matrix::empty(10);
        let pa = build_privacy_matrix(&f, 2, 5, 9).unwrap();
        assert_eq!(pa.rows(), 5);
        assert!(pa.d_w() >= 2);
        assert_eq!(joint_min_weight(&f, pa.matrix()).unwrap(), pa.d_w());
    }

    #[test]
    fn privacy_matrix_empty_is_valid() {
        let f = Gf2Matrix::identity(4);
        let pa = build_privacy_matrix(&f, 3, 0, 1).unwrap();
        assert_eq!(pa.rows(), 0);
    }

    #[test]
    fn block_pattern_privacy_certifies_d_w() {
        let pa = build_block_pattern_privacy(20, 10, 2, 10, 3).unwrap();
        assert_eq!(pa.rows(), 2);
        assert!(pa.d_w() >= 10);
        // The expansion preserves the joint weight against the block parity.
        let f = LinearCode::block_repetition(20, 10).unwrap();
        assert!(f.parity_check().stack(pa.matrix()).has_independent_rows());
    }

    #[test]
    fn entropy_values() {
        assert!((binary_entropy(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert!((binary_entropy(0.1).unwrap() - 0.4689955935892812).abs() < 1e-12);
        assert!(binary_entropy(1.2).is_err());
    }

    #[test]
    fn rate_formula() {
        let r = asymptotic_rate(0.05, 0.0, 0.0, 0.0).unwrap();
        assert!((r - 0.06200881282156071).abs() < 1e-12);
        assert!((asymptotic_rate(0.0, 0.0, 0.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        let negative = asymptotic_rate(0.05, 0.0, 0.01, 0.02).unwrap();
        let expected = 1.0 - binary_entropy(0.1).unwrap() - binary_entropy(0.14).unwrap();
        assert!((negative - expected).abs() < 1e-12);
        assert!(negative < 0.0);
        assert!(asymptotic_rate(0.3, 0.3, 0.0, 0.0).is_err());
    }

    #[test]
    fn binomial_sum_examples() {
        let (exact, bound) = binomial_sum_bound_check(0.25, 8).unwrap();
        assert_eq!(exact, 37);
        assert!((bound - (8.0 * binary_entropy(0.25).unwrap()).exp2()).abs() < 1e-9);
        assert!((exact as f64) <= bound);

        let (exact, bound) = binomial_sum_bound_check(0.1, 20).unwrap();
        assert_eq!(exact, 211);
        assert!((exact as f64) <= bound);
    }

    proptest! {
        #[test]
        fn binomial_sum_never_exceeds_bound(mu in 0.01f64..0.49, n in 1u64..31) {
            let (exact, bound) = binomial_sum_bound_check(mu, n).unwrap();
            prop_assert!(exact as f64 <= bound * (1.0 + 1e-12));
        }

        #[test]
        fn bitstring_roundtrips(bits in proptest::collection::vec(0u8..2, 0..120)) {
            let s = BitString::from_bits(&bits);
            let text = s.to_bit_string();
            prop_assert_eq!(BitString::parse(&text).unwrap(), s);
        }

        #[test]
        fn xor_weight_is_distance(a in proptest::collection::vec(0u8..2, 33), b in proptest::collection::vec(0u8..2, 33)) {
            let x = BitString::from_bits(&a);
            let y = BitString::from_bits(&b);
            prop_assert_eq!(x.distance(&y), x.xor(&y).weight());
        }
    }

    #[test]
    fn null_space_is_orthogonal_complement() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let rows = 3;
            let cols = 8;
            let m = Gf2Matrix::new((0..rows).map(|_| BitString::random(cols, &mut rng)).collect(), cols);
            for v in m.null_space() {
                let out = gf2_matvec(&m, &v).unwrap();
                assert!(out.is_zero());
            }
            let rank = m.rank();
            assert_eq!(m.null_space().len(), cols - rank);
        }
    }
}
