//! Finite fields F_p, F_q = F_{p^e} and the tower F_{q^M}.
//!
//! Elements of a field of order N are stored as discrete logarithms with
//! respect to a fixed generator (`Fe::ZERO` is a sentinel). Addition goes
//! through a Zech table, so every operation is a couple of table lookups.
//!
//! Encoding: an element is a polynomial c_0 + c_1 x + ... + c_{n-1} x^{n-1}
//! modulo the field's modulus, packed as the integer sum c_i p^i. The modulus
//! is the least monic irreducible polynomial of degree n whose packed
//! non-leading coefficients are smallest; the generator is the least packed
//! element of full multiplicative order.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest field order accepted by [`FieldSpec::new`].
pub const MAX_FIELD_ORDER: u64 = 1 << 22;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime factors in increasing order.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

pub fn mod_pow(base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u128;
    let mut b = (base % m) as u128;
    let m = m as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

/// Splits q into (p, e) with q = p^e.
pub fn prime_power(q: u64) -> Result<(u32, u32)> {
    let fs = prime_factors(q);
    if fs.len() != 1 {
        return Err(Error::NotPrimePower(q));
    }
    let p = fs[0];
    let mut e = 0;
    let mut r = q;
    while r > 1 {
        r /= p;
        e += 1;
    }
    Ok((p as u32, e))
}

/// Binomial coefficient mod p via base-p digits (Lucas).
pub fn lucas_binom(mut n: u64, mut k: u64, p: u32) -> u32 {
    let p = p as u64;
    let mut acc = 1u64;
    while k > 0 || n > 0 {
        let (nd, kd) = (n % p, k % p);
        if kd > nd {
            return 0;
        }
        acc = acc * small_binom(nd, kd) % p;
        n /= p;
        k /= p;
    }
    acc as u32
}

fn small_binom(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r as u64
}

// Dense polynomials over F_p, ascending coefficients.

fn trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn inv_mod_p(a: u32, p: u32) -> u32 {
    mod_pow(a as u64, p as u64 - 2, p as u64) as u32
}

fn poly_rem(a: &[u32], f: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    trim(&mut r);
    let df = f.len() - 1;
    let lead_inv = inv_mod_p(f[df], p);
    while r.len() > df {
        let top = r.len() - 1;
        let c = (r[top] as u64 * lead_inv as u64 % p as u64) as u32;
        if c != 0 {
            let shift = top - df;
            for (i, &fi) in f.iter().enumerate() {
                let sub = (c as u64 * fi as u64 % p as u64) as u32;
                r[shift + i] = (r[shift + i] + p - sub) % p;
            }
        }
        trim(&mut r);
    }
    r
}

fn poly_mulmod(a: &[u32], b: &[u32], f: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    let prod: Vec<u32> = prod.into_iter().map(|c| c as u32).collect();
    poly_rem(&prod, f, p)
}

fn poly_powmod(a: &[u32], mut exp: u64, f: &[u32], p: u32) -> Vec<u32> {
    let mut acc = vec![1u32];
    let mut b = poly_rem(a, f, p);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = poly_mulmod(&acc, &b, f, p);
        }
        b = poly_mulmod(&b, &b, f, p);
        exp >>= 1;
    }
    acc
}

fn poly_gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// Rabin's test: f of degree n is irreducible iff x^{p^n} = x mod f and
/// gcd(x^{p^{n/r}} - x, f) = 1 for every prime r | n.
fn is_irreducible(f: &[u32], p: u32) -> bool {
    let n = (f.len() - 1) as u64;
    if n == 1 {
        return true;
    }
    let x = vec![0u32, 1];
    let frob_iter = |k: u64| {
        let mut y = x.clone();
        for _ in 0..k {
            y = poly_powmod(&y, p as u64, f, p);
        }
        y
    };
    let minus_x = |mut y: Vec<u32>| {
        y.resize(y.len().max(2), 0);
        y[1] = (y[1] + p - 1) % p;
        trim(&mut y);
        y
    };
    if !minus_x(frob_iter(n)).is_empty() {
        return false;
    }
    for r in prime_factors(n) {
        let g = poly_gcd(&minus_x(frob_iter(n / r)), f, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

fn unpack(mut v: u64, p: u32, n: usize) -> Vec<u32> {
    let mut out = vec![0u32; n];
    for c in out.iter_mut() {
        *c = (v % p as u64) as u32;
        v /= p as u64;
    }
    out
}

fn pack(digits: &[u32], p: u32) -> u32 {
    digits
        .iter()
        .rev()
        .fold(0u64, |acc, &d| acc * p as u64 + d as u64) as u32
}

/// Least monic irreducible of degree n over F_p (ascending coefficients,
/// leading 1 included).
pub fn least_irreducible(p: u32, n: u32) -> Vec<u32> {
    let count = (p as u64).pow(n);
    for v in 0..count {
        let mut f = unpack(v, p, n as usize);
        f.push(1);
        if is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

/// A field element in log representation.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fe(pub(crate) u32);

impl Fe {
    pub const ZERO: Fe = Fe(u32::MAX);
    pub const ONE: Fe = Fe(0);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == u32::MAX
    }

    /// Discrete log with respect to the field generator.
    pub fn log(self) -> Option<u32> {
        if self.is_zero() {
            None
        } else {
            Some(self.0)
        }
    }
}

impl fmt::Debug for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            write!(f, "0")
        } else {
            write!(f, "g^{}", self.0)
        }
    }
}

/// Log/antilog/Zech tables of one finite field.
#[derive(Clone, Debug)]
pub struct GfTables {
    p: u32,
    n: u32,
    order: u32,
    modulus: Vec<u32>,
    generator: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
    zech: Vec<u32>,
}

impl GfTables {
    pub fn new(p: u32, n: u32) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        let order = (p as u64).checked_pow(n).unwrap_or(u64::MAX);
        if n == 0 || order > MAX_FIELD_ORDER {
            return Err(Error::DegreeOverflow { p, n, bound: MAX_FIELD_ORDER });
        }
        let modulus = least_irreducible(p, n);
        let nn = n as usize;
        let m1 = order - 1;
        let factors = prime_factors(m1);
        let generator = (1..order)
            .find(|&v| {
                let a = unpack(v, p, nn);
                factors.iter().all(|&r| {
                    let y = poly_powmod(&a, m1 / r, &modulus, p);
                    y != [1]
                })
            })
            .map(|v| v as u32)
            .unwrap_or(1);
        let g = unpack(generator as u64, p, nn);
        let mut exp = Vec::with_capacity(m1 as usize);
        let mut log = vec![u32::MAX; order as usize];
        let mut cur = vec![1u32];
        for k in 0..m1 as u32 {
            let mut d = cur.clone();
            d.resize(nn, 0);
            let v = pack(&d, p);
            exp.push(v);
            log[v as usize] = k;
            cur = poly_mulmod(&cur, &g, &modulus, p);
        }
        let zech = exp
            .iter()
            .map(|&v| {
                let plus_one = if v % p == p - 1 { v - (p - 1) } else { v + 1 };
                log[plus_one as usize]
            })
            .collect();
        Ok(GfTables { p, n, order: order as u32, modulus, generator, exp, log, zech })
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn degree(&self) -> u32 {
        self.n
    }
    pub fn order(&self) -> u32 {
        self.order
    }
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }
    pub fn generator_packed(&self) -> u32 {
        self.generator
    }

    #[inline]
    fn m1(&self) -> u32 {
        self.order - 1
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.is_zero() || b.is_zero() {
            return Fe::ZERO;
        }
        let s = a.0 + b.0;
        let m1 = self.m1();
        Fe(if s >= m1 { s - m1 } else { s })
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        let m1 = self.m1();
        let d = if b.0 >= a.0 { b.0 - a.0 } else { b.0 + m1 - a.0 };
        let z = self.zech[d as usize];
        if z == u32::MAX {
            return Fe::ZERO;
        }
        let s = a.0 + z;
        Fe(if s >= m1 { s - m1 } else { s })
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        if a.is_zero() || self.p == 2 {
            return a;
        }
        let h = self.m1() / 2;
        Fe(if a.0 >= h { a.0 - h } else { a.0 + h })
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    pub fn inv(&self, a: Fe) -> Result<Fe> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Fe(if a.0 == 0 { 0 } else { self.m1() - a.0 }))
    }

    pub fn pow(&self, a: Fe, n: i64) -> Result<Fe> {
        if a.is_zero() {
            return match n {
                0 => Ok(Fe::ONE),
                n if n > 0 => Ok(Fe::ZERO),
                _ => Err(Error::DivisionByZero),
            };
        }
        let m1 = self.m1() as i128;
        let e = (a.0 as i128 * n as i128).rem_euclid(m1);
        Ok(Fe(e as u32))
    }

    pub fn from_packed(&self, v: u32) -> Fe {
        Fe(self.log[v as usize])
    }

    pub fn packed(&self, a: Fe) -> u32 {
        if a.is_zero() {
            0
        } else {
            self.exp[a.0 as usize]
        }
    }

    pub fn coords(&self, a: Fe) -> Vec<u32> {
        unpack(self.packed(a) as u64, self.p, self.n as usize)
    }

    pub fn from_fp(&self, c: u32) -> Fe {
        self.from_packed(c % self.p)
    }

    /// Multiplicative order of a nonzero element.
    pub fn element_order(&self, a: Fe) -> u64 {
        let m1 = self.m1() as u64;
        m1 / gcd(a.0 as u64, m1)
    }
}

/// A nonzero element of the canonical model of F_q, stored by its packed
/// encoding. For prime q this is the residue 1..q-1.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct Sign(pub u32);

impl Sign {
    pub const ONE: Sign = Sign(1);
}

/// How signs are written in text.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Default)]
pub enum EpsMode {
    /// Residues 1..q-1, only for prime q.
    #[default]
    Residue,
    /// `g^k`, powers of the documented generator of F_q^x.
    GenExp,
}

/// The canonical model of F_q with its sign arithmetic.
#[derive(Clone, Debug)]
pub struct Fq {
    q: u32,
    e: u32,
    tables: GfTables,
}

impl Fq {
    pub fn new(p: u32, e: u32) -> Result<Self> {
        let tables = GfTables::new(p, e)?;
        Ok(Fq { q: tables.order(), e, tables })
    }

    pub fn from_q(q: u64) -> Result<Self> {
        let (p, e) = prime_power(q)?;
        Fq::new(p, e)
    }

    pub fn q(&self) -> u32 {
        self.q
    }
    pub fn p(&self) -> u32 {
        self.tables.p()
    }
    pub fn e(&self) -> u32 {
        self.e
    }
    pub fn tables(&self) -> &GfTables {
        &self.tables
    }
    pub fn is_prime_field(&self) -> bool {
        self.e == 1
    }

    /// All signs in canonical (packed) order.
    pub fn signs(&self) -> Vec<Sign> {
        (1..self.q).map(Sign).collect()
    }

    pub fn mul(&self, a: Sign, b: Sign) -> Sign {
        let t = &self.tables;
        Sign(t.packed(t.mul(t.from_packed(a.0), t.from_packed(b.0))))
    }

    pub fn inv(&self, a: Sign) -> Sign {
        let t = &self.tables;
        Sign(t.packed(t.inv(t.from_packed(a.0)).expect("signs are nonzero")))
    }

    pub fn product(&self, signs: impl IntoIterator<Item = Sign>) -> Sign {
        signs.into_iter().fold(Sign::ONE, |acc, s| self.mul(acc, s))
    }

    /// Exponent k with sign = g_q^k for the documented generator g_q.
    pub fn sign_log(&self, a: Sign) -> u32 {
        self.tables.from_packed(a.0).0
    }

    pub fn sign_from_log(&self, k: u32) -> Sign {
        Sign(self.tables.packed(Fe(k % (self.q - 1))))
    }

    pub fn sign_order(&self, a: Sign) -> u64 {
        self.tables.element_order(self.tables.from_packed(a.0))
    }

    pub fn generator(&self) -> Sign {
        Sign(self.tables.generator_packed())
    }

    pub fn format_sign(&self, a: Sign, mode: EpsMode) -> String {
        match mode {
            EpsMode::Residue if self.is_prime_field() => a.0.to_string(),
            _ => format!("g^{}", self.sign_log(a)),
        }
    }

    /// Accepts a residue (prime q only) or `g^k`.
    pub fn parse_sign(&self, tok: &str) -> Result<Sign> {
        let tok = tok.trim();
        if let Some(k) = tok.strip_prefix("g^") {
            let k: u32 = k
                .parse()
                .map_err(|_| Error::InvalidIndex(format!("malformed sign token {tok:?}")))?;
            return Ok(self.sign_from_log(k));
        }
        if !self.is_prime_field() {
            return Err(Error::InvalidIndex(format!(
                "sign {tok:?}: residues are only accepted for prime q; use g^k"
            )));
        }
        let v: i64 = tok
            .parse()
            .map_err(|_| Error::InvalidIndex(format!("malformed sign token {tok:?}")))?;
        let r = v.rem_euclid(self.q as i64) as u32;
        if r == 0 {
            return Err(Error::InvalidIndex("sign must be nonzero".into()));
        }
        Ok(Sign(r))
    }
}

/// Which root [`FieldSpec::unit_root`] extracts.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum RootKind {
    /// gamma with gamma^{q-1} = eps.
    Gamma,
    /// eta with eta^{q-1} = -1.
    Eta,
}

/// Serializable description of a field, embedded in all CLI output.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub p: u32,
    pub e: u32,
    #[serde(rename = "M")]
    pub m: u32,
    pub q: u32,
    pub modulus: Vec<u32>,
    pub generator: u32,
    pub fq_modulus: Vec<u32>,
    pub fq_generator: u32,
}

/// The scalar field F_{q^M} together with the embedded copy of F_q.
#[derive(Clone, Debug)]
pub struct FieldSpec {
    m: u32,
    fq: Fq,
    big: GfTables,
    fq_embed: Vec<Fe>,
    fq_back: HashMap<Fe, u32>,
}

impl FieldSpec {
    pub fn new(p: u32, e: u32, m: u32) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        if e == 0 || m == 0 {
            return Err(Error::Invalid("e and M must be at least 1".into()));
        }
        let fq = Fq::new(p, e)?;
        let big = GfTables::new(p, e * m)?;
        let fq_embed: Vec<Fe> = if e == 1 {
            (0..p).map(|c| big.from_fp(c)).collect()
        } else {
            // Send the model's x to the root of its modulus with least log.
            let f = fq.tables().modulus();
            let eval = |x: Fe| {
                f.iter()
                    .rev()
                    .fold(Fe::ZERO, |acc, &c| big.add(big.mul(acc, x), big.from_fp(c)))
            };
            let rho = (0..big.order() - 1)
                .map(Fe)
                .find(|&x| eval(x).is_zero())
                .expect("F_q embeds in F_(q^M)");
            (0..fq.q())
                .map(|v| {
                    unpack(v as u64, p, e as usize)
                        .iter()
                        .rev()
                        .fold(Fe::ZERO, |acc, &c| big.add(big.mul(acc, rho), big.from_fp(c)))
                })
                .collect()
        };
        let fq_back = fq_embed.iter().enumerate().map(|(i, &x)| (x, i as u32)).collect();
        Ok(FieldSpec { m, fq, big, fq_embed, fq_back })
    }

    /// Uses the smallest tower degree in which every gamma_i and eta exist.
    pub fn for_signs(p: u32, e: u32, signs: &[Sign]) -> Result<Self> {
        let fq = Fq::new(p, e)?;
        Self::new(p, e, tower_degree(&fq, signs))
    }

    pub fn p(&self) -> u32 {
        self.big.p()
    }
    pub fn e(&self) -> u32 {
        self.fq.e()
    }
    pub fn m(&self) -> u32 {
        self.m
    }
    pub fn q(&self) -> u32 {
        self.fq.q()
    }
    pub fn fq(&self) -> &Fq {
        &self.fq
    }
    pub fn tables(&self) -> &GfTables {
        &self.big
    }
    /// Order of the tower field, q^M.
    pub fn order(&self) -> u32 {
        self.big.order()
    }
    /// Degree of F_{q^M} over F_p.
    pub fn fp_degree(&self) -> u32 {
        self.big.degree()
    }

    pub fn meta(&self) -> FieldMeta {
        FieldMeta {
            p: self.p(),
            e: self.e(),
            m: self.m,
            q: self.q(),
            modulus: self.big.modulus().to_vec(),
            generator: self.big.generator_packed(),
            fq_modulus: self.fq.tables().modulus().to_vec(),
            fq_generator: self.fq.tables().generator_packed(),
        }
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        self.big.add(a, b)
    }
    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.big.sub(a, b)
    }
    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        self.big.neg(a)
    }
    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        self.big.mul(a, b)
    }
    pub fn inv(&self, a: Fe) -> Result<Fe> {
        self.big.inv(a)
    }
    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe> {
        Ok(self.mul(a, self.inv(b)?))
    }
    pub fn pow(&self, a: Fe, n: i64) -> Result<Fe> {
        self.big.pow(a, n)
    }

    /// The exponent q^n reduced mod q^M - 1, for repeated twisting.
    pub fn frob_exponent(&self, n: u32) -> u32 {
        let m1 = (self.order() - 1) as u64;
        mod_pow(self.q() as u64, n as u64, m1) as u32
    }

    #[inline]
    pub fn frob_with(&self, a: Fe, qn: u32) -> Fe {
        if a.is_zero() {
            return a;
        }
        let m1 = (self.order() - 1) as u64;
        Fe((a.0 as u64 * qn as u64 % m1) as u32)
    }

    /// x^{q^n}.
    pub fn frobenius(&self, a: Fe, n: u32) -> Fe {
        self.frob_with(a, self.frob_exponent(n))
    }

    pub fn from_fp(&self, c: u32) -> Fe {
        self.big.from_fp(c)
    }
    pub fn from_packed(&self, v: u32) -> Result<Fe> {
        if v >= self.order() {
            return Err(Error::Invalid(format!("packed value {v} outside F_{}", self.order())));
        }
        Ok(self.big.from_packed(v))
    }
    pub fn packed(&self, a: Fe) -> u32 {
        self.big.packed(a)
    }
    pub fn coords(&self, a: Fe) -> Vec<u32> {
        self.big.coords(a)
    }
    pub fn generator(&self) -> Fe {
        Fe(1 % (self.order() - 1).max(1))
    }

    /// F_q in canonical order (0 first), embedded.
    pub fn fq_elements(&self) -> &[Fe] {
        &self.fq_embed
    }

    pub fn embed(&self, s: Sign) -> Fe {
        self.fq_embed[s.0 as usize]
    }

    /// Packed F_q-model value of an element of F_q, None outside F_q.
    pub fn fq_packed(&self, a: Fe) -> Option<u32> {
        self.fq_back.get(&a).copied()
    }

    pub fn in_fq(&self, a: Fe) -> bool {
        self.fq_back.contains_key(&a)
    }

    /// Least power of the generator x with x^{q-1} = target.
    pub fn root_q_minus_1(&self, target: Fe) -> Result<Fe> {
        let q1 = (self.q() - 1) as u64;
        let m1 = (self.order() - 1) as u64;
        let no_root = || Error::NoRoot { target: format!("{target:?}"), m: self.m };
        let l = target.log().ok_or_else(no_root)? as u64;
        // k(q-1) = l mod (q^M - 1); q-1 divides q^M - 1.
        if !l.is_multiple_of(q1) {
            return Err(no_root());
        }
        let k = (l / q1) % (m1 / q1);
        Ok(Fe(k as u32))
    }

    pub fn unit_root(&self, eps: Fe, which: RootKind) -> Result<Fe> {
        match which {
            RootKind::Gamma => {
                if !self.in_fq(eps) || eps.is_zero() {
                    return Err(Error::Invalid("gamma requires eps in F_q^x".into()));
                }
                self.root_q_minus_1(eps)
            }
            RootKind::Eta => self.root_q_minus_1(self.neg(Fe::ONE)),
        }
    }

    pub fn gamma(&self, s: Sign) -> Result<Fe> {
        self.unit_root(self.embed(s), RootKind::Gamma)
    }

    pub fn eta(&self) -> Result<Fe> {
        self.unit_root(Fe::ONE, RootKind::Eta)
    }
}

/// lcm of the orders of the signs, and of 2 in odd characteristic.
pub fn tower_degree(fq: &Fq, signs: &[Sign]) -> u32 {
    let base = if fq.p() == 2 { 1 } else { 2 };
    signs.iter().fold(base, |acc, &s| lcm(acc, fq.sign_order(s))) as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_addition() {
        let f = FieldSpec::new(3, 1, 1).unwrap();
        let two = f.from_fp(2);
        assert_eq!(f.add(two, two), f.from_fp(1));
    }

    #[test]
    fn f9_modulus_and_frobenius() {
        let f = FieldSpec::new(3, 1, 2).unwrap();
        assert_eq!(f.tables().modulus(), &[1, 0, 1]);
        let x = f.from_packed(3).unwrap();
        assert_eq!(f.frobenius(x, 1), f.neg(x));
        // least generator of F_9 under x^2 = -1 is x + 1
        assert_eq!(f.tables().generator_packed(), 4);
    }

    #[test]
    fn gamma_roots() {
        let f = FieldSpec::new(3, 1, 2).unwrap();
        let g = f.gamma(Sign(2)).unwrap();
        assert_eq!(f.pow(g, 2).unwrap(), f.from_fp(2));
        // (x+1)^2 = 2x, the least generator power solving gamma^2 = -1
        assert_eq!(f.packed(g), 6);
        assert_eq!(f.gamma(Sign(1)).unwrap(), Fe::ONE);

        let f5 = FieldSpec::new(5, 1, 1).unwrap();
        assert!(f5.gamma(Sign(4)).is_err());
        let f25 = FieldSpec::new(5, 1, 2).unwrap();
        let g = f25.gamma(Sign(4)).unwrap();
        assert_eq!(f25.pow(g, 4).unwrap(), f25.from_fp(4));
    }

    #[test]
    fn char_two_eta() {
        let f = FieldSpec::new(2, 2, 1).unwrap();
        let eta = f.eta().unwrap();
        assert_eq!(f.pow(eta, 3).unwrap(), f.neg(Fe::ONE));
        assert_eq!(tower_degree(f.fq(), &f.fq().signs()), 3);
    }

    #[test]
    fn lucas_examples() {
        assert_eq!(lucas_binom(3, 1, 5), 3);
        assert_eq!(lucas_binom(7, 2, 3), 0);
        assert_eq!(lucas_binom(11, 0, 7), 1);
        assert_eq!(lucas_binom(2, 5, 7), 0);
    }

    #[test]
    fn lucas_matches_pascal() {
        for p in [2u32, 3, 5, 7] {
            let mut row = vec![1u64];
            for n in 0..=40u64 {
                for k in 0..=n {
                    assert_eq!(lucas_binom(n, k, p) as u64, row[k as usize] % p as u64);
                }
                let mut next = vec![1u64; row.len() + 1];
                for k in 1..row.len() {
                    next[k] = (row[k - 1] + row[k]) % (p as u64 * 1_000_000);
                }
                row = next;
            }
        }
    }

    #[test]
    fn field_identities() {
        for (p, e, m) in [(2, 1, 3), (3, 1, 2), (5, 1, 2), (2, 2, 1), (3, 2, 2), (7, 1, 2)] {
            let f = FieldSpec::new(p, e, m).unwrap();
            let qm = f.order() - 1;
            for k in 0..qm.min(300) {
                let x = Fe(k);
                assert_eq!(f.mul(x, f.inv(x).unwrap()), Fe::ONE);
                assert_eq!(f.frobenius(x, m), x);
                assert_eq!(f.add(x, f.neg(x)), Fe::ZERO);
            }
            for &a in f.fq_elements() {
                assert_eq!(f.frobenius(a, 1), a);
            }
            let fq = f.fq();
            for a in fq.signs() {
                for b in fq.signs() {
                    assert_eq!(f.embed(fq.mul(a, b)), f.mul(f.embed(a), f.embed(b)));
                }
            }
        }
    }

    #[test]
    fn sign_text() {
        let fq = Fq::new(3, 1).unwrap();
        assert_eq!(fq.parse_sign("2").unwrap(), Sign(2));
        assert!(fq.parse_sign("0").is_err());
        assert_eq!(fq.format_sign(Sign(2), EpsMode::Residue), "2");
        let f9 = Fq::new(3, 2).unwrap();
        assert!(f9.parse_sign("2").is_err());
        let s = f9.parse_sign("g^3").unwrap();
        assert_eq!(f9.format_sign(s, EpsMode::Residue), "g^3");
    }

    #[test]
    fn overflow_is_reported() {
        assert!(matches!(FieldSpec::new(2, 1, 30), Err(Error::DegreeOverflow { .. })));
        assert!(matches!(FieldSpec::new(4, 1, 1), Err(Error::NotPrime(4))));
    }
}
