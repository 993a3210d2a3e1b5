//! Universal integer codes, binary fractions on the open unit interval, and
//! generalized length over mixed alphabets.
//!
//! Every codeword is built as a sequence of `(index, alphabet size)` symbols.
//! A symbol whose alphabet is a power of two renders as that many bits,
//! most-significant first, so codes assembled from binary digits and
//! 2-bit length symbols have an exact ASCII rendering. Generalized length is
//! always `Σ log2(alphabet size)` regardless of rendering.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest precision accepted for a [`BinaryFraction`].
pub const MAX_FRACTION_PRECISION: u32 = 62;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodecError {
    #[error("value {value} is not representable by {scheme}")]
    OutOfRange { scheme: IntCodeScheme, value: u64 },
    #[error("malformed codeword for {scheme}: {reason}")]
    Malformed {
        scheme: IntCodeScheme,
        reason: &'static str,
    },
    #[error("{0} has no binary rendering")]
    NonBinary(IntCodeScheme),
    #[error("invalid code scheme: {0}")]
    InvalidScheme(String),
    #[error("invalid binary fraction: {0}")]
    InvalidFraction(String),
    #[error("invalid bit string: {0}")]
    InvalidBits(String),
}

pub type Result<T> = std::result::Result<T, CodecError>;

/// One realized symbol drawn from an alphabet of `alphabet` outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Symbol {
    pub index: u64,
    pub alphabet: u64,
}

impl Symbol {
    fn bit(b: bool) -> Self {
        Symbol {
            index: b as u64,
            alphabet: 2,
        }
    }

    pub fn length(&self) -> f64 {
        (self.alphabet as f64).log2()
    }

    /// Width in bits when the alphabet is a power of two.
    fn bit_width(&self) -> Option<u32> {
        self.alphabet
            .is_power_of_two()
            .then(|| self.alphabet.trailing_zeros())
    }
}

/// A realized description: a symbol sequence over per-position alphabets.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Code {
    symbols: Vec<Symbol>,
}

impl Code {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a symbol. Panics if `index >= alphabet` or the alphabet is empty.
    pub fn push_symbol(&mut self, index: u64, alphabet: u64) {
        assert!(alphabet >= 1 && index < alphabet, "symbol out of range");
        self.symbols.push(Symbol { index, alphabet });
    }

    pub fn push_bit(&mut self, bit: bool) {
        self.symbols.push(Symbol::bit(bit));
    }

    /// Appends the low `width` bits of `value`, most-significant first.
    pub fn push_bits(&mut self, value: u64, width: u32) {
        for shift in (0..width).rev() {
            self.push_bit((value >> shift) & 1 == 1);
        }
    }

    pub fn append(&mut self, other: &Code) {
        self.symbols.extend_from_slice(&other.symbols);
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    /// Generalized length in bits.
    pub fn length(&self) -> f64 {
        self.symbols.iter().map(Symbol::length).sum()
    }

    /// Binary rendering, defined when every alphabet is a power of two.
    pub fn bit_vec(&self) -> Option<Vec<bool>> {
        let mut out = Vec::with_capacity(self.symbols.len());
        for s in &self.symbols {
            let width = s.bit_width()?;
            for shift in (0..width).rev() {
                out.push((s.index >> shift) & 1 == 1);
            }
        }
        Some(out)
    }

    /// ASCII `'0'`/`'1'` rendering, when one exists.
    pub fn bits(&self) -> Option<String> {
        self.bit_vec().map(|v| bits_to_string(&v))
    }
}

pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(CodecError::InvalidBits(format!("unexpected character {c:?}"))),
        })
        .collect()
}

/// Packs bits MSB-first behind an 8-byte big-endian bit count; the final
/// byte is zero-padded.
pub fn pack_bits(bits: &[bool]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + bits.len().div_ceil(8));
    out.extend_from_slice(&(bits.len() as u64).to_be_bytes());
    for chunk in bits.chunks(8) {
        let mut byte = 0u8;
        for (pos, &b) in chunk.iter().enumerate() {
            if b {
                byte |= 0x80 >> pos;
            }
        }
        out.push(byte);
    }
    out
}

pub fn unpack_bits(bytes: &[u8]) -> Result<Vec<bool>> {
    if bytes.len() < 8 {
        return Err(CodecError::InvalidBits("missing bit-count header".into()));
    }
    let (head, body) = bytes.split_at(8);
    let count = u64::from_be_bytes(head.try_into().expect("8-byte header")) as usize;
    if body.len() != count.div_ceil(8) {
        return Err(CodecError::InvalidBits(format!(
            "bit count {count} does not match {} payload bytes",
            body.len()
        )));
    }
    Ok((0..count)
        .map(|i| body[i / 8] & (0x80 >> (i % 8)) != 0)
        .collect())
}

/// Integer code families. Serialized by name, e.g. `"gamma"` or `"rissanen3"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum IntCodeScheme {
    Unary,
    EliasGamma,
    EliasDelta,
    EliasOmega,
    /// Recursive length-of-length code with `k >= 1` length recursions.
    Rissanen(u32),
    /// A leading symbol with `m >= 2` outcomes states how many payload bits follow.
    LengthSymbol(u32),
}

impl IntCodeScheme {
    pub fn validate(self) -> Result<Self> {
        match self {
            IntCodeScheme::Rissanen(0) => Err(CodecError::InvalidScheme(
                "rissanen needs at least one recursion".into(),
            )),
            IntCodeScheme::LengthSymbol(m) if !(2..=64).contains(&m) => Err(
                CodecError::InvalidScheme("length symbol needs 2..=64 outcomes".into()),
            ),
            s => Ok(s),
        }
    }

    /// Largest representable value, or `None` when the range is unbounded
    /// within `u64`.
    pub fn max_value(self) -> Option<u64> {
        match self {
            IntCodeScheme::Unary
            | IntCodeScheme::EliasGamma
            | IntCodeScheme::EliasDelta
            | IntCodeScheme::EliasOmega => None,
            IntCodeScheme::Rissanen(k) => {
                // A segment of length l tops out at 2^(l+1) - 2.
                let mut max: u64 = 1;
                for _ in 0..k {
                    if max >= 63 {
                        return None;
                    }
                    max = (1u64 << (max + 1)) - 2;
                }
                Some(max)
            }
            IntCodeScheme::LengthSymbol(m) => {
                if m >= 64 {
                    Some(u64::MAX - 1)
                } else {
                    Some((1u64 << m) - 2)
                }
            }
        }
    }

    pub fn represents(self, z: u64) -> bool {
        z < u64::MAX && self.max_value().is_none_or(|max| z <= max)
    }

    /// Whether `Σ 2^-L(z)` over the full range equals one.
    pub fn is_complete(self) -> bool {
        !matches!(self, IntCodeScheme::EliasDelta | IntCodeScheme::EliasOmega)
    }

    /// Codeword length in bits without materializing the code.
    pub fn length_of(self, z: u64) -> Result<f64> {
        if !self.represents(z) {
            return Err(CodecError::OutOfRange {
                scheme: self,
                value: z,
            });
        }
        let len = match self {
            IntCodeScheme::Unary => z as f64 + 1.0,
            IntCodeScheme::EliasGamma => {
                let n = bit_len(z + 1);
                (2 * n - 1) as f64
            }
            IntCodeScheme::EliasDelta => {
                let n = bit_len(z + 1) as u64;
                let l = bit_len(n);
                ((2 * l - 1) as u64 + n - 1) as f64
            }
            IntCodeScheme::EliasOmega => {
                let mut total = 1u64;
                let mut n = z + 1;
                while n > 1 {
                    let b = bit_len(n) as u64;
                    total += b;
                    n = b - 1;
                }
                total as f64
            }
            IntCodeScheme::Rissanen(k) => {
                let mut total = 1u64;
                let mut v = z;
                for _ in 0..k {
                    let l = floor_log2_plus_one(v);
                    total += l as u64;
                    v = l as u64;
                }
                total as f64
            }
            IntCodeScheme::LengthSymbol(m) => {
                (m as f64).log2() + floor_log2_plus_one(z) as f64
            }
        };
        Ok(len)
    }

    /// Inclusive end of the run of values starting at `z` that share its
    /// codeword length.
    fn length_block_end(self, z: u64) -> u64 {
        match self {
            IntCodeScheme::Unary => z,
            IntCodeScheme::EliasGamma | IntCodeScheme::EliasDelta | IntCodeScheme::EliasOmega => {
                let n = bit_len(z + 1);
                if n >= 64 {
                    u64::MAX - 1
                } else {
                    (1u64 << n) - 2
                }
            }
            IntCodeScheme::Rissanen(_) | IntCodeScheme::LengthSymbol(_) => {
                let l = floor_log2_plus_one(z);
                if l >= 63 {
                    u64::MAX - 1
                } else {
                    (1u64 << (l + 1)) - 2
                }
            }
        }
    }
}

impl fmt::Display for IntCodeScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntCodeScheme::Unary => write!(f, "unary"),
            IntCodeScheme::EliasGamma => write!(f, "gamma"),
            IntCodeScheme::EliasDelta => write!(f, "delta"),
            IntCodeScheme::EliasOmega => write!(f, "omega"),
            IntCodeScheme::Rissanen(k) => write!(f, "rissanen{k}"),
            IntCodeScheme::LengthSymbol(m) => write!(f, "lensym{m}"),
        }
    }
}

impl FromStr for IntCodeScheme {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self> {
        let scheme = match s {
            "unary" => IntCodeScheme::Unary,
            "gamma" | "elias_gamma" => IntCodeScheme::EliasGamma,
            "delta" | "elias_delta" => IntCodeScheme::EliasDelta,
            "omega" | "elias_omega" => IntCodeScheme::EliasOmega,
            _ => {
                let parse = |rest: &str| {
                    rest.parse::<u32>()
                        .map_err(|_| CodecError::InvalidScheme(s.to_string()))
                };
                if let Some(rest) = s.strip_prefix("rissanen") {
                    IntCodeScheme::Rissanen(parse(rest)?)
                } else if let Some(rest) = s.strip_prefix("lensym") {
                    IntCodeScheme::LengthSymbol(parse(rest)?)
                } else {
                    return Err(CodecError::InvalidScheme(s.to_string()));
                }
            }
        };
        scheme.validate()
    }
}

impl From<IntCodeScheme> for String {
    fn from(s: IntCodeScheme) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for IntCodeScheme {
    type Error = CodecError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Number of significant bits in `n` (0 for 0).
fn bit_len(n: u64) -> u32 {
    64 - n.leading_zeros()
}

/// `floor(log2(z + 1))`: the payload width of `z` under offset enumeration.
fn floor_log2_plus_one(z: u64) -> u32 {
    match z.checked_add(1) {
        Some(n) => bit_len(n) - 1,
        None => 64,
    }
}

/// Offset enumeration of binary sequences: the empty sequence is 0, then
/// `0, 1, 00, 01, ...` are `1, 2, 3, 4, ...`. Returns (width, payload).
fn enumerate_split(z: u64) -> (u32, u64) {
    let width = floor_log2_plus_one(z);
    let offset = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
    (width, z - offset)
}

pub fn integer_encode(scheme: IntCodeScheme, z: u64) -> Result<Code> {
    let scheme = scheme.validate()?;
    if !scheme.represents(z) {
        return Err(CodecError::OutOfRange { scheme, value: z });
    }
    let mut code = Code::new();
    match scheme {
        IntCodeScheme::Unary => {
            if z > (1 << 24) {
                return Err(CodecError::OutOfRange { scheme, value: z });
            }
            for _ in 0..z {
                code.push_bit(true);
            }
            code.push_bit(false);
        }
        IntCodeScheme::EliasGamma => {
            let n = z.checked_add(1).ok_or(CodecError::OutOfRange { scheme, value: z })?;
            push_gamma(&mut code, n);
        }
        IntCodeScheme::EliasDelta => {
            let n = z.checked_add(1).ok_or(CodecError::OutOfRange { scheme, value: z })?;
            let len = bit_len(n);
            push_gamma(&mut code, len as u64);
            code.push_bits(n, len - 1);
        }
        IntCodeScheme::EliasOmega => {
            let mut n = z.checked_add(1).ok_or(CodecError::OutOfRange { scheme, value: z })?;
            let mut groups = Vec::new();
            while n > 1 {
                let len = bit_len(n);
                groups.push((n, len));
                n = len as u64 - 1;
            }
            for &(value, len) in groups.iter().rev() {
                code.push_bits(value, len);
            }
            code.push_bit(false);
        }
        IntCodeScheme::Rissanen(k) => {
            // Peel segments from the last one back: each segment's width is
            // the value carried by the segment before it.
            let mut segments = Vec::with_capacity(k as usize);
            let mut value = z;
            for _ in 0..k {
                let (width, payload) = enumerate_split(value);
                segments.push((payload, width));
                value = width as u64;
            }
            if value > 1 {
                return Err(CodecError::OutOfRange { scheme, value: z });
            }
            code.push_bit(value == 1);
            for &(payload, width) in segments.iter().rev() {
                code.push_bits(payload, width);
            }
        }
        IntCodeScheme::LengthSymbol(m) => {
            let (width, payload) = enumerate_split(z);
            code.push_symbol(width as u64, m as u64);
            code.push_bits(payload, width);
        }
    }
    Ok(code)
}

fn push_gamma(code: &mut Code, n: u64) {
    let len = bit_len(n);
    for _ in 0..len - 1 {
        code.push_bit(false);
    }
    code.push_bits(n, len);
}

struct BitReader<'a> {
    bits: &'a [bool],
    pos: usize,
    scheme: IntCodeScheme,
}

impl<'a> BitReader<'a> {
    fn new(scheme: IntCodeScheme, bits: &'a [bool]) -> Self {
        BitReader {
            bits,
            pos: 0,
            scheme,
        }
    }

    fn truncated(&self) -> CodecError {
        CodecError::Malformed {
            scheme: self.scheme,
            reason: "truncated codeword",
        }
    }

    fn overflow(&self) -> CodecError {
        CodecError::Malformed {
            scheme: self.scheme,
            reason: "value overflows 64 bits",
        }
    }

    fn bit(&mut self) -> Result<bool> {
        let b = *self.bits.get(self.pos).ok_or_else(|| self.truncated())?;
        self.pos += 1;
        Ok(b)
    }

    fn read(&mut self, width: u32) -> Result<u64> {
        if width > 64 {
            return Err(self.overflow());
        }
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | self.bit()? as u64;
        }
        Ok(v)
    }

    /// Reads an offset-enumerated payload of `width` bits.
    fn read_enumerated(&mut self, width: u64) -> Result<u64> {
        if width == 0 {
            return Ok(0);
        }
        if width > 63 {
            return Err(self.overflow());
        }
        let payload = self.read(width as u32)?;
        Ok((1u64 << width) - 1 + payload)
    }

    fn read_gamma(&mut self) -> Result<u64> {
        let mut zeros = 0u32;
        while !self.bit()? {
            zeros += 1;
            if zeros > 63 {
                return Err(self.overflow());
            }
        }
        let rest = self.read(zeros)?;
        Ok((1u64 << zeros) | rest)
    }
}

/// Decodes one codeword from the front of `bits`, returning the value and the
/// number of bits consumed.
pub fn integer_decode(scheme: IntCodeScheme, bits: &[bool]) -> Result<(u64, usize)> {
    let scheme = scheme.validate()?;
    let mut r = BitReader::new(scheme, bits);
    let z = match scheme {
        IntCodeScheme::Unary => {
            let mut z = 0u64;
            while r.bit()? {
                z += 1;
            }
            z
        }
        IntCodeScheme::EliasGamma => r.read_gamma()? - 1,
        IntCodeScheme::EliasDelta => {
            let len = r.read_gamma()?;
            if len > 64 {
                return Err(r.overflow());
            }
            let rest = r.read(len as u32 - 1)?;
            if len == 64 {
                if rest == u64::MAX >> 1 {
                    return Err(r.overflow());
                }
                ((1u64 << 63) | rest) - 1
            } else {
                ((1u64 << (len - 1)) | rest) - 1
            }
        }
        IntCodeScheme::EliasOmega => {
            let mut n = 1u64;
            while r.bit()? {
                if n >= 64 {
                    return Err(r.overflow());
                }
                let rest = r.read(n as u32)?;
                n = (1u64 << n) | rest;
            }
            n - 1
        }
        IntCodeScheme::Rissanen(k) => {
            let mut value = r.bit()? as u64;
            for _ in 0..k {
                value = r.read_enumerated(value)?;
            }
            value
        }
        IntCodeScheme::LengthSymbol(m) => {
            if !m.is_power_of_two() {
                return Err(CodecError::NonBinary(scheme));
            }
            let width = r.read(m.trailing_zeros())?;
            r.read_enumerated(width)?
        }
    };
    Ok((z, r.pos))
}

/// Partial Kraft sum `Σ 2^-L(z)` over representable `z <= up_to`, or over the
/// full range when `up_to` is `None`. Unbounded ranges are summed until the
/// terms underflow.
pub fn kraft_sum(scheme: IntCodeScheme, up_to: Option<u64>) -> Result<f64> {
    let scheme = scheme.validate()?;
    let limit = match (up_to, scheme.max_value()) {
        (Some(a), Some(b)) => a.min(b),
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (None, None) => u64::MAX - 1,
    };
    let mut sum = 0.0;
    let mut z = 0u64;
    loop {
        let len = scheme.length_of(z)?;
        if len > 1100.0 {
            break;
        }
        let end = scheme.length_block_end(z).min(limit);
        sum += (end - z + 1) as f64 * (-len).exp2();
        if end >= limit {
            break;
        }
        z = end + 1;
    }
    Ok(sum)
}

/// A dyadic rational `(2i - 1) / 2^(z+1)` on the open unit interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BinaryFraction {
    z: u32,
    i: u64,
}

impl BinaryFraction {
    pub fn new(z: u32, i: u64) -> Result<Self> {
        if z > MAX_FRACTION_PRECISION {
            return Err(CodecError::InvalidFraction(format!("precision {z} too large")));
        }
        if i == 0 || i > 1u64 << z {
            return Err(CodecError::InvalidFraction(format!(
                "numerator index {i} outside [1, 2^{z}]"
            )));
        }
        Ok(BinaryFraction { z, i })
    }

    pub const fn half() -> Self {
        BinaryFraction { z: 0, i: 1 }
    }

    pub fn precision(&self) -> u32 {
        self.z
    }

    pub fn index(&self) -> u64 {
        self.i
    }

    pub fn value(&self) -> f64 {
        (2 * self.i - 1) as f64 / (self.z as f64 + 1.0).exp2()
    }

    pub fn is_half(&self) -> bool {
        self.z == 0
    }

    /// All fractions with precision `z`, in increasing order.
    pub fn with_precision(z: u32) -> impl Iterator<Item = BinaryFraction> {
        (1..=(1u64 << z)).map(move |i| BinaryFraction { z, i })
    }

    /// Parses `"3/8"` style or `"z,i"` style input.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || CodecError::InvalidFraction(s.to_string());
        if let Some((num, den)) = s.split_once('/') {
            let num: u64 = num.trim().parse().map_err(|_| bad())?;
            let den: u64 = den.trim().parse().map_err(|_| bad())?;
            if num.is_multiple_of(2) || !den.is_power_of_two() || den < 2 || num >= den {
                return Err(bad());
            }
            let z = den.trailing_zeros() - 1;
            BinaryFraction::new(z, num.div_ceil(2))
        } else if let Some((z, i)) = s.split_once(',') {
            BinaryFraction::new(
                z.trim().parse().map_err(|_| bad())?,
                i.trim().parse().map_err(|_| bad())?,
            )
        } else {
            Err(bad())
        }
    }
}

impl fmt::Display for BinaryFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", 2 * self.i - 1, 1u128 << (self.z + 1))
    }
}

/// Precision values `z <= cap` that `scheme` can state.
pub fn representable_precisions(scheme: IntCodeScheme, cap: u32) -> impl Iterator<Item = u32> {
    (0..=cap.min(MAX_FRACTION_PRECISION)).filter(move |&z| precision_representable(scheme, z))
}

/// A length-symbol precision code spends its single symbol on `z` itself, so
/// it states `z < m`; other schemes encode `z` as an integer.
pub fn precision_representable(scheme: IntCodeScheme, z: u32) -> bool {
    match scheme {
        IntCodeScheme::LengthSymbol(m) => z < m,
        s => s.represents(z as u64),
    }
}

pub fn fraction_encode(z_scheme: IntCodeScheme, f: BinaryFraction) -> Result<Code> {
    let z_scheme = z_scheme.validate()?;
    let mut code = match z_scheme {
        IntCodeScheme::LengthSymbol(m) => {
            if f.z >= m {
                return Err(CodecError::OutOfRange {
                    scheme: z_scheme,
                    value: f.z as u64,
                });
            }
            let mut c = Code::new();
            c.push_symbol(f.z as u64, m as u64);
            c
        }
        s => integer_encode(s, f.z as u64)?,
    };
    code.push_bits(f.i - 1, f.z);
    Ok(code)
}

/// Generalized length of a fraction's code.
pub fn fraction_length(z_scheme: IntCodeScheme, f: BinaryFraction) -> Result<f64> {
    let head = match z_scheme {
        IntCodeScheme::LengthSymbol(m) => {
            if f.z >= m {
                return Err(CodecError::OutOfRange {
                    scheme: z_scheme,
                    value: f.z as u64,
                });
            }
            (m as f64).log2()
        }
        s => s.length_of(f.z as u64)?,
    };
    Ok(head + f.z as f64)
}

pub fn fraction_decode(z_scheme: IntCodeScheme, bits: &[bool]) -> Result<(BinaryFraction, usize)> {
    let z_scheme = z_scheme.validate()?;
    let (z, used) = match z_scheme {
        IntCodeScheme::LengthSymbol(m) => {
            if !m.is_power_of_two() {
                return Err(CodecError::NonBinary(z_scheme));
            }
            let mut r = BitReader::new(z_scheme, bits);
            (r.read(m.trailing_zeros())?, r.pos)
        }
        s => integer_decode(s, bits)?,
    };
    if z > MAX_FRACTION_PRECISION as u64 {
        return Err(CodecError::Malformed {
            scheme: z_scheme,
            reason: "fraction precision too large",
        });
    }
    let mut r = BitReader::new(z_scheme, &bits[used..]);
    let numerator = r.read(z as u32)?;
    let f = BinaryFraction {
        z: z as u32,
        i: numerator + 1,
    };
    Ok((f, used + r.pos))
}

/// Transform from the open unit interval to the real line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FractionMap {
    /// Angle on the real projective circle: `tan(π(q - 1/2))`.
    Tangent,
    /// Inverse normal CDF: `√2 erf⁻¹(2q - 1)`.
    Probit,
}

pub fn fraction_to_real(q: f64, map: FractionMap, scale: f64) -> f64 {
    debug_assert!(q > 0.0 && q < 1.0 && scale > 0.0);
    let unit = match map {
        FractionMap::Tangent => {
            if q == 0.5 {
                0.0
            } else {
                (std::f64::consts::PI * (q - 0.5)).tan()
            }
        }
        FractionMap::Probit => std::f64::consts::SQRT_2 * statrs::function::erf::erf_inv(2.0 * q - 1.0),
    };
    scale * unit
}
