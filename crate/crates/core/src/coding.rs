//! Discrete-side machinery: binning, Gray codes, binary linear codes with
//! syndrome decoding, Gilbert-Varshamov sizing and Toeplitz hashing.
//!
//! Bit strings are `Vec<bool>`, most significant bit first.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::binary_entropy;
use crate::error::{ensure, Error, Result};
use crate::seed;

/// Codes with more check rows than this do not fit the packed column layout.
pub const MAX_CHECKS: usize = 64;
/// Largest block length of a single code block.
pub const MAX_BLOCK_LEN: usize = 128;
/// Largest block dimension for which the minimum distance is brute-forced.
pub const MAX_DISTANCE_DIM: usize = 24;
/// Largest per-block syndrome length for which a decoding table is built.
pub const MAX_TABLE_CHECKS: usize = 20;

/// `⌊x/width + 1/2⌋`: bins are `[(m-½)w, (m+½)w)`.
pub fn bin_index(x: f64, width: f64) -> i64 {
    debug_assert!(width > 0.0);
    (x / width + 0.5).floor() as i64
}

/// Reflected binary Gray code of `k` on `bits` bits.
pub fn gray_encode(k: u64, bits: usize) -> Result<Vec<bool>> {
    ensure!(
        (1..=63).contains(&bits),
        Domain,
        "Gray codes need 1..=63 bits, got {bits}"
    );
    ensure!(k < 1 << bits, Domain, "{k} does not fit in {bits} bits");
    Ok(u64_to_bits(k ^ (k >> 1), bits))
}

pub fn gray_decode(bits: &[bool]) -> Result<u64> {
    ensure!(
        (1..=63).contains(&bits.len()),
        Domain,
        "Gray codes need 1..=63 bits"
    );
    let mut g = bits_to_u64(bits);
    let mut shift = 1;
    while shift < 64 {
        g ^= g >> shift;
        shift <<= 1;
    }
    Ok(g)
}

pub fn u64_to_bits(v: u64, bits: usize) -> Vec<bool> {
    (0..bits).rev().map(|i| v >> i & 1 == 1).collect()
}

pub fn bits_to_u64(bits: &[bool]) -> u64 {
    bits.iter().fold(0, |acc, &b| acc << 1 | b as u64)
}

pub fn hamming_distance(a: &[bool], b: &[bool]) -> usize {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

pub fn xor_bits(a: &[bool], b: &[bool]) -> Vec<bool> {
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn bits_from_str(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::Parse(format!("'{other}' is not a bit"))),
        })
        .collect()
}

/// Packs bits into bytes, zero-padding the final byte.
pub fn pack_bits(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|c| {
            c.iter()
                .enumerate()
                .fold(0u8, |acc, (i, &b)| acc | (b as u8) << (7 - i))
        })
        .collect()
}

pub fn unpack_bits(bytes: &[u8], len: usize) -> Result<Vec<bool>> {
    ensure!(
        bytes.len() * 8 >= len,
        Parse,
        "{} bytes cannot hold {len} bits",
        bytes.len()
    );
    Ok((0..len)
        .map(|i| bytes[i / 8] >> (7 - i % 8) & 1 == 1)
        .collect())
}

/// Binning of one quadrature: `2·count` bins of `width`, indices on `n_bits` bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinConfig {
    pub width: f64,
    pub count: u64,
    pub n_bits: usize,
}

impl BinConfig {
    pub fn new(width: f64, n_bits: usize) -> Result<Self> {
        ensure!(
            width > 0.0 && width.is_finite(),
            Domain,
            "bin width must be positive, got {width}"
        );
        ensure!(
            (1..=62).contains(&n_bits),
            Domain,
            "bin index needs 1..=62 bits, got {n_bits}"
        );
        Ok(BinConfig {
            width,
            count: 1 << (n_bits - 1),
            n_bits,
        })
    }

    /// Half-width of the covered interval, `count·width`.
    pub fn cutoff(&self) -> f64 {
        self.count as f64 * self.width
    }

    pub fn in_range(&self, x: f64) -> bool {
        (-self.cutoff()..self.cutoff()).contains(&x)
    }

    /// Offset bin index in `[0, 2·count)`, or `None` outside `[-count·w, count·w)`.
    ///
    /// The topmost half bin `[(count-½)w, count·w)` rounds to index `count`,
    /// which would need one more bit; it is folded into the last bin.
    pub fn offset_index(&self, x: f64) -> Option<u64> {
        if !self.in_range(x) {
            return None;
        }
        let idx = bin_index(x, self.width) + self.count as i64;
        Some((idx.max(0) as u64).min(2 * self.count - 1))
    }
}

/// Gray encoding of the offset bin index, or `None` when `x` is out of range.
pub fn signed_bin_bits(x: f64, cfg: &BinConfig) -> Option<Vec<bool>> {
    cfg.offset_index(x)
        .map(|i| gray_encode(i, cfg.n_bits).expect("offset index fits"))
}

/// `⌈block · h(γ)⌉`.
pub fn gv_syndrome_len(block: usize, gamma: f64) -> Result<usize> {
    ensure!(
        (0.0..=0.5).contains(&gamma),
        Domain,
        "GV sizing needs 0 <= gamma <= 1/2, got {gamma}"
    );
    Ok((block as f64 * binary_entropy(gamma)?).ceil() as usize)
}

/// How a code is specified on the command line: `hamming`, `repetition:N`,
/// `random:N,K` (seeded by the caller), each optionally `^B` for a direct sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeSpec {
    Hamming74,
    Repetition(usize),
    Random { n: usize, k: usize },
}

impl FromStr for CodeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unknown code '{s}'"));
        let s = s.trim();
        if s == "hamming" || s == "hamming:7,4" || s == "hamming(7,4)" {
            return Ok(CodeSpec::Hamming74);
        }
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        let nums: Vec<usize> = rest
            .split(',')
            .map(|v| v.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        match (kind, nums.as_slice()) {
            ("repetition", [n]) => Ok(CodeSpec::Repetition(*n)),
            ("random", [n, k]) => Ok(CodeSpec::Random { n: *n, k: *k }),
            _ => Err(bad()),
        }
    }
}

/// A binary linear code, possibly the direct sum of `blocks` copies of one
/// block code. Parity checks are stored column-wise for the block code: bit
/// `r` of `columns[j]` is the entry in check row `r`, column `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearCode {
    block_n: usize,
    block_k: usize,
    columns: Vec<u64>,
    blocks: usize,
    distance: Option<usize>,
}

impl LinearCode {
    /// Builds a single-block code from its parity-check rows.
    pub fn from_rows(rows: &[Vec<bool>]) -> Result<Self> {
        ensure!(
            !rows.is_empty(),
            Validation,
            "a parity matrix needs at least one row"
        );
        let n = rows[0].len();
        ensure!(
            rows.iter().all(|r| r.len() == n),
            Validation,
            "ragged parity matrix"
        );
        let columns = (0..n)
            .map(|j| {
                rows.iter()
                    .enumerate()
                    .fold(0u64, |acc, (r, row)| acc | (row[j] as u64) << r)
            })
            .collect();
        Self::from_columns(n, rows.len(), columns)
    }

    fn from_columns(n: usize, s: usize, columns: Vec<u64>) -> Result<Self> {
        ensure!(
            n <= MAX_BLOCK_LEN,
            Resource,
            "block length {n} exceeds {MAX_BLOCK_LEN}"
        );
        ensure!(
            (1..=MAX_CHECKS).contains(&s) && s <= n,
            Validation,
            "need 1 <= n-k <= min(n, {MAX_CHECKS}), got n = {n}, n-k = {s}"
        );
        ensure!(
            rank(&columns) == s,
            Validation,
            "parity matrix is not full rank"
        );
        let mut code = LinearCode {
            block_n: n,
            block_k: n - s,
            columns,
            blocks: 1,
            distance: None,
        };
        if code.block_k <= MAX_DISTANCE_DIM {
            code.distance = Some(code.brute_force_distance());
        }
        Ok(code)
    }

    pub fn hamming74() -> Self {
        // column j is the binary expansion of j+1, row 0 most significant
        let columns = (1..=7u64)
            .map(|v| (v >> 2 & 1) | (v >> 1 & 1) << 1 | (v & 1) << 2)
            .collect();
        Self::from_columns(7, 3, columns).expect("Hamming(7,4) is valid")
    }

    pub fn repetition(n: usize) -> Result<Self> {
        ensure!(n >= 2, Domain, "repetition code needs n >= 2");
        let s = n - 1;
        ensure!(
            s <= MAX_CHECKS,
            Resource,
            "repetition({n}) exceeds {MAX_CHECKS} checks"
        );
        let all = if s == 64 { u64::MAX } else { (1u64 << s) - 1 };
        let columns = std::iter::once(all)
            .chain((0..s).map(|r| 1u64 << r))
            .collect();
        Self::from_columns(n, s, columns)
    }

    /// Uniformly random parity matrix, redrawn until full rank.
    pub fn random(n: usize, k: usize, seed: u64) -> Result<Self> {
        ensure!(k < n, Domain, "random code needs k < n");
        let s = n - k;
        ensure!(
            s <= MAX_CHECKS && n <= MAX_BLOCK_LEN,
            Resource,
            "random({n},{k}) exceeds size caps"
        );
        let mask = if s == 64 { u64::MAX } else { (1u64 << s) - 1 };
        for attempt in 0..100 {
            let mut rng = seed::rng(seed, 0xc0de, attempt);
            let columns: Vec<u64> = (0..n).map(|_| rng.random::<u64>() & mask).collect();
            if rank(&columns) == s {
                return Self::from_columns(n, s, columns);
            }
        }
        Err(Error::Resource(format!(
            "no full-rank random({n},{k}) draw in 100 tries"
        )))
    }

    pub fn make(spec: CodeSpec, seed: u64) -> Result<Self> {
        match spec {
            CodeSpec::Hamming74 => Ok(Self::hamming74()),
            CodeSpec::Repetition(n) => Self::repetition(n),
            CodeSpec::Random { n, k } => Self::random(n, k, seed),
        }
    }

    /// The direct sum of `blocks` copies; the minimum distance is unchanged.
    pub fn direct_sum(&self, blocks: usize) -> Result<Self> {
        ensure!(self.blocks == 1, Validation, "code is already a direct sum");
        ensure!(blocks >= 1, Domain, "need at least one block");
        Ok(LinearCode {
            blocks,
            ..self.clone()
        })
    }

    /// Attaches a known minimum distance when brute force is out of reach.
    pub fn with_declared_distance(mut self, d: usize) -> Result<Self> {
        ensure!(
            d >= 1 && d <= self.block_n - self.block_k + 1,
            Validation,
            "declared distance {d} violates the Singleton bound"
        );
        if let Some(known) = self.distance {
            ensure!(
                known == d,
                Validation,
                "declared distance {d} but brute force gives {known}"
            );
        }
        self.distance = Some(d);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.block_n * self.blocks
    }

    pub fn k(&self) -> usize {
        self.block_k * self.blocks
    }

    /// Syndrome length `n - k`.
    pub fn s(&self) -> usize {
        self.n() - self.k()
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn block_len(&self) -> usize {
        self.block_n
    }

    pub fn distance(&self) -> Option<usize> {
        self.distance
    }

    fn block_s(&self) -> usize {
        self.block_n - self.block_k
    }

    /// Parity rows of the block code.
    pub fn block_rows(&self) -> Vec<Vec<bool>> {
        (0..self.block_s())
            .map(|r| self.columns.iter().map(|c| c >> r & 1 == 1).collect())
            .collect()
    }

    fn block_syndrome(&self, word: &[bool]) -> u64 {
        word.iter()
            .zip(&self.columns)
            .filter(|(&b, _)| b)
            .fold(0, |acc, (_, c)| acc ^ c)
    }

    fn unpack_syndrome(&self, s: u64, out: &mut Vec<bool>) {
        out.extend((0..self.block_s()).map(|r| s >> r & 1 == 1));
    }

    pub fn syndrome(&self, word: &[bool]) -> Result<Vec<bool>> {
        ensure!(
            word.len() == self.n(),
            Domain,
            "word has {} bits, code length is {}",
            word.len(),
            self.n()
        );
        let mut out = Vec::with_capacity(self.s());
        for block in word.chunks(self.block_n) {
            self.unpack_syndrome(self.block_syndrome(block), &mut out);
        }
        Ok(out)
    }

    /// Minimum weight over nonzero codewords by Gray-order enumeration of the
    /// `2^k` combinations of a null-space basis.
    fn brute_force_distance(&self) -> usize {
        let basis = self.null_space();
        if basis.is_empty() {
            return self.block_n + 1;
        }
        let mut word = 0u128;
        let mut best = usize::MAX;
        for i in 1u64..1 << basis.len() {
            word ^= basis[i.trailing_zeros() as usize];
            best = best.min(word.count_ones() as usize);
        }
        best
    }

    /// A basis of the block code, one vector per non-pivot column.
    fn null_space(&self) -> Vec<u128> {
        // reduced column vectors keyed by leading bit, with the set of
        // original columns summing to them
        let mut pivots: Vec<(u64, u128)> = Vec::new();
        let mut basis = Vec::new();
        for (j, &c) in self.columns.iter().enumerate() {
            let mut v = c;
            let mut combo = 1u128 << j;
            for &(p, pc) in &pivots {
                if v ^ p < v {
                    v ^= p;
                    combo ^= pc;
                }
            }
            if v == 0 {
                basis.push(combo);
            } else {
                pivots.push((v, combo));
                pivots.sort_by(|a, b| b.0.cmp(&a.0));
            }
        }
        basis
    }

    /// Builds the coset-leader table used by `decode_with_syndrome`.
    pub fn decoder(&self) -> Result<SyndromeDecoder> {
        SyndromeDecoder::new(self)
    }

    pub fn header(&self) -> String {
        let d = self.distance.map_or("?".to_string(), |d| d.to_string());
        let mut h = format!("n={} k={} d={d}", self.n(), self.k());
        if self.blocks > 1 {
            h.push_str(&format!(" blocks={}", self.blocks));
        }
        h
    }

    /// One header line, then the block code's parity rows as hex.
    pub fn to_hex_file(&self) -> String {
        let mut out = self.header();
        out.push('\n');
        for row in self.block_rows() {
            out.push_str(&hex::encode(pack_bits(&row)));
            out.push('\n');
        }
        out
    }

    pub fn from_hex_file(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty code file".into()))?;
        let mut fields = HashMap::new();
        for tok in header.split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header token '{tok}'")))?;
            fields.insert(k, v);
        }
        let num = |key: &str| -> Result<usize> {
            fields
                .get(key)
                .ok_or_else(|| Error::Parse(format!("header lacks '{key}'")))?
                .parse()
                .map_err(|_| Error::Parse(format!("header field '{key}' is not an integer")))
        };
        let (n, k) = (num("n")?, num("k")?);
        let blocks = if fields.contains_key("blocks") {
            num("blocks")?
        } else {
            1
        };
        ensure!(
            blocks >= 1 && n % blocks == 0 && k % blocks == 0,
            Validation,
            "blocks must divide n and k"
        );
        let block_n = n / blocks;
        let rows = lines
            .map(|l| {
                let bytes =
                    hex::decode(l).map_err(|e| Error::Parse(format!("bad hex row: {e}")))?;
                unpack_bits(&bytes, block_n)
            })
            .collect::<Result<Vec<_>>>()?;
        ensure!(
            rows.len() == (n - k) / blocks,
            Validation,
            "expected {} parity rows, found {}",
            (n - k) / blocks,
            rows.len()
        );
        let mut code = LinearCode::from_rows(&rows)?.direct_sum(blocks)?;
        match fields.get("d").copied() {
            Some("?") | None => {}
            Some(d) => {
                let d = d
                    .parse()
                    .map_err(|_| Error::Parse("header field 'd' is not an integer".into()))?;
                code = code.with_declared_distance(d)?;
            }
        }
        Ok(code)
    }
}

impl fmt::Display for LinearCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.header())
    }
}

fn rank(columns: &[u64]) -> usize {
    let mut basis: Vec<u64> = Vec::new();
    for &c in columns {
        let mut v = c;
        for &b in &basis {
            v = v.min(v ^ b);
        }
        if v != 0 {
            basis.push(v);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis.len()
}

/// Coset leaders of one block code: for every syndrome, the lightest error
/// pattern producing it, ties going to the lexicographically smallest support.
#[derive(Debug, Clone)]
pub struct SyndromeDecoder {
    code: LinearCode,
    leaders: Vec<u128>,
}

impl SyndromeDecoder {
    pub fn new(code: &LinearCode) -> Result<Self> {
        let s = code.block_s();
        ensure!(
            s <= MAX_TABLE_CHECKS,
            Unsupported,
            "syndrome table needs n-k <= {MAX_TABLE_CHECKS} per block, got {s}"
        );
        let size = 1usize << s;
        let mut leaders = vec![u128::MAX; size];
        leaders[0] = 0;
        let mut filled = 1;
        let n = code.block_n;
        let mut weight = 1;
        while filled < size {
            // supports in lexicographic order
            let mut idx: Vec<usize> = (0..weight).collect();
            loop {
                let syn = idx.iter().fold(0u64, |acc, &j| acc ^ code.columns[j]) as usize;
                if leaders[syn] == u128::MAX {
                    leaders[syn] = idx.iter().fold(0u128, |acc, &j| acc | 1 << j);
                    filled += 1;
                }
                let Some(pos) = (0..weight).rev().find(|&i| idx[i] < n - weight + i) else {
                    break;
                };
                idx[pos] += 1;
                for i in pos + 1..weight {
                    idx[i] = idx[i - 1] + 1;
                }
            }
            weight += 1;
        }
        Ok(SyndromeDecoder {
            code: code.clone(),
            leaders,
        })
    }

    pub fn code(&self) -> &LinearCode {
        &self.code
    }

    /// The word closest to `word` whose syndrome is `target`.
    pub fn decode_with_syndrome(&self, word: &[bool], target: &[bool]) -> Result<Vec<bool>> {
        let code = &self.code;
        ensure!(
            word.len() == code.n(),
            Domain,
            "word has {} bits, code length is {}",
            word.len(),
            code.n()
        );
        ensure!(
            target.len() == code.s(),
            Domain,
            "syndrome has {} bits, expected {}",
            target.len(),
            code.s()
        );
        let bs = code.block_s();
        let mut out = Vec::with_capacity(word.len());
        for (block, t) in word.chunks(code.block_n).zip(target.chunks(bs)) {
            let t = t
                .iter()
                .enumerate()
                .fold(0u64, |acc, (r, &b)| acc | (b as u64) << r);
            let e = self.leaders[(code.block_syndrome(block) ^ t) as usize];
            out.extend(
                block
                    .iter()
                    .enumerate()
                    .map(|(j, &b)| b ^ (e >> j & 1 == 1)),
            );
        }
        Ok(out)
    }
}

/// The Toeplitz matrix `T[i][j] = diag[i + in_len - 1 - j]` over GF(2).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToeplitzHash {
    in_len: usize,
    out_len: usize,
    diag: Vec<bool>,
}

impl ToeplitzHash {
    pub fn new(in_len: usize, out_len: usize, diag: Vec<bool>) -> Result<Self> {
        ensure!(in_len >= 1, Domain, "hash input must be nonempty");
        ensure!(
            out_len <= in_len,
            Domain,
            "output length {out_len} exceeds input length {in_len}"
        );
        ensure!(
            diag.len() == in_len + out_len.max(1) - 1,
            Validation,
            "Toeplitz seed needs {} bits, got {}",
            in_len + out_len.max(1) - 1,
            diag.len()
        );
        Ok(ToeplitzHash {
            in_len,
            out_len,
            diag,
        })
    }

    pub fn seed_len(in_len: usize, out_len: usize) -> usize {
        in_len + out_len.max(1) - 1
    }

    pub fn random<R: Rng>(in_len: usize, out_len: usize, rng: &mut R) -> Result<Self> {
        let diag = (0..Self::seed_len(in_len, out_len))
            .map(|_| rng.random())
            .collect();
        Self::new(in_len, out_len, diag)
    }

    pub fn in_len(&self) -> usize {
        self.in_len
    }

    pub fn out_len(&self) -> usize {
        self.out_len
    }

    pub fn diag(&self) -> &[bool] {
        &self.diag
    }

    pub fn apply(&self, input: &[bool]) -> Result<Vec<bool>> {
        ensure!(
            input.len() == self.in_len,
            Domain,
            "hash input has {} bits, expected {}",
            input.len(),
            self.in_len
        );
        Ok((0..self.out_len)
            .map(|i| {
                input
                    .iter()
                    .enumerate()
                    .filter(|(_, &x)| x)
                    .fold(false, |acc, (j, _)| {
                        acc ^ self.diag[i + self.in_len - 1 - j]
                    })
            })
            .collect())
    }
}

/// `max_{x ≠ x'} Pr_seed[F(x) = F(x')]` over every Toeplitz seed.
pub fn universality_check(in_len: usize, out_len: usize) -> Result<f64> {
    ensure!(
        (1..=6).contains(&in_len) && (1..=3).contains(&out_len),
        Unsupported,
        "exhaustive universality check needs in_len <= 6 and out_len <= 3"
    );
    ensure!(
        out_len <= in_len,
        Domain,
        "output length exceeds input length"
    );
    let seed_len = ToeplitzHash::seed_len(in_len, out_len);
    let hashes: Vec<Vec<u64>> = (0..1u64 << seed_len)
        .map(|s| {
            let h = ToeplitzHash::new(in_len, out_len, u64_to_bits(s, seed_len)).unwrap();
            (0..1u64 << in_len)
                .map(|x| bits_to_u64(&h.apply(&u64_to_bits(x, in_len)).unwrap()))
                .collect()
        })
        .collect();
    let mut worst = 0usize;
    for x in 0..1usize << in_len {
        for y in x + 1..1usize << in_len {
            worst = worst.max(hashes.iter().filter(|h| h[x] == h[y]).count());
        }
    }
    Ok(worst as f64 / hashes.len() as f64)
}
