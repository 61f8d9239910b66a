//! Additively idempotent semirings.
//!
//! Two instances ship: [`Boolean`] (`or`, `and`) and [`CappedMinPlus`]
//! (`min`, `+` with every value above the cap sent to infinity). The hot
//! paths of the crate are generic over [`Semiring`]; the runtime-typed
//! [`SemiringDescriptor`] / [`SemiringElement`] pair exists for the CLI and
//! other places where the instance is only known at run time.
//!
//! Every idempotent semiring carries the order `a <= b  iff  a + b == a`.
//! The additive identity is the top of that order, and `lcu` is the join.

use std::fmt;

use crate::error::{Error, Result};

pub trait Semiring: Clone + fmt::Debug + Send + Sync + 'static {
    type Elem: Copy + Eq + fmt::Debug + fmt::Display + Send + Sync + 'static;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn mul(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;

    /// Binary least common upper bound.
    fn lcu(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;

    /// Sum of all elements, i.e. the least element of the order. This is
    /// the lcu of an empty sequence.
    fn bottom(&self) -> Self::Elem;

    fn descriptor(&self) -> SemiringDescriptor;
    fn to_element(&self, a: Self::Elem) -> SemiringElement;
    fn from_element(&self, a: SemiringElement) -> Result<Self::Elem>;

    /// Every element, when the carrier is small enough to list.
    fn elements(&self) -> Option<Vec<Self::Elem>>;

    fn leq(&self, a: Self::Elem, b: Self::Elem) -> bool {
        self.add(a, b) == a
    }

    fn is_zero(&self, a: Self::Elem) -> bool {
        a == self.zero()
    }

    fn iverson(&self, cond: bool) -> Self::Elem {
        if cond {
            self.one()
        } else {
            self.zero()
        }
    }

    fn sum<I: IntoIterator<Item = Self::Elem>>(&self, xs: I) -> Self::Elem {
        xs.into_iter().fold(self.zero(), |acc, x| self.add(acc, x))
    }

    fn lcu_all<I: IntoIterator<Item = Self::Elem>>(&self, xs: I) -> Self::Elem {
        xs.into_iter().fold(self.bottom(), |acc, x| self.lcu(acc, x))
    }
}

/// The Boolean semiring `({0,1}, or, and, 0, 1)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Boolean;

impl Semiring for Boolean {
    type Elem = bool;

    fn zero(&self) -> bool {
        false
    }
    fn one(&self) -> bool {
        true
    }
    fn add(&self, a: bool, b: bool) -> bool {
        a | b
    }
    fn mul(&self, a: bool, b: bool) -> bool {
        a & b
    }
    // 1 <= 0 in the induced order, so the join is `and`.
    fn lcu(&self, a: bool, b: bool) -> bool {
        a & b
    }
    fn bottom(&self) -> bool {
        true
    }
    fn descriptor(&self) -> SemiringDescriptor {
        SemiringDescriptor::Boolean
    }
    fn to_element(&self, a: bool) -> SemiringElement {
        SemiringElement::Bool(a)
    }
    fn from_element(&self, a: SemiringElement) -> Result<bool> {
        match a {
            SemiringElement::Bool(b) => Ok(b),
            other => Err(Error::SemiringMismatch(format!("{other:?} is not a Boolean element"))),
        }
    }
    fn elements(&self) -> Option<Vec<bool>> {
        Some(vec![false, true])
    }
}

/// Element of a capped min-plus semiring: a finite cost or infinity.
///
/// Infinity is the sentinel `u64::MAX`; caps are always below it, so no
/// finite cost can collide with the sentinel.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cost(u64);

impl Cost {
    pub const INF: Cost = Cost(u64::MAX);

    pub const fn finite(v: u64) -> Cost {
        assert!(v != u64::MAX, "u64::MAX is reserved for infinity");
        Cost(v)
    }

    pub fn is_inf(self) -> bool {
        self == Cost::INF
    }

    pub fn value(self) -> Option<u64> {
        if self.is_inf() {
            None
        } else {
            Some(self.0)
        }
    }
}

impl fmt::Debug for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            Some(v) => write!(f, "{v}"),
            None => f.write_str("INF"),
        }
    }
}

/// `({0..=cap} ∪ {∞}, min, +, ∞, 0)`, with sums above `cap` sent to `∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CappedMinPlus {
    cap: u64,
}

impl CappedMinPlus {
    pub const MAX_CAP: u64 = u64::MAX - 1;

    pub fn new(cap: u64) -> Result<Self> {
        if cap > Self::MAX_CAP {
            return Err(Error::Usage(format!("cap {cap} exceeds {}", Self::MAX_CAP)));
        }
        Ok(CappedMinPlus { cap })
    }

    /// Builds a cap, clamping at the largest representable value.
    pub fn saturating(cap: u64) -> Self {
        CappedMinPlus { cap: cap.min(Self::MAX_CAP) }
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    /// Embeds an integer, sending everything above the cap to infinity.
    pub fn elem(&self, v: u64) -> Cost {
        if v > self.cap {
            Cost::INF
        } else {
            Cost(v)
        }
    }
}

impl Semiring for CappedMinPlus {
    type Elem = Cost;

    fn zero(&self) -> Cost {
        Cost::INF
    }
    fn one(&self) -> Cost {
        Cost(0)
    }
    fn add(&self, a: Cost, b: Cost) -> Cost {
        a.min(b)
    }
    fn mul(&self, a: Cost, b: Cost) -> Cost {
        if a.is_inf() || b.is_inf() {
            return Cost::INF;
        }
        match a.0.checked_add(b.0) {
            Some(v) if v <= self.cap => Cost(v),
            _ => Cost::INF,
        }
    }
    fn lcu(&self, a: Cost, b: Cost) -> Cost {
        a.max(b)
    }
    fn bottom(&self) -> Cost {
        Cost(0)
    }
    fn descriptor(&self) -> SemiringDescriptor {
        SemiringDescriptor::CappedMinPlus { cap: self.cap }
    }
    fn to_element(&self, a: Cost) -> SemiringElement {
        SemiringElement::Cost(a)
    }
    fn from_element(&self, a: SemiringElement) -> Result<Cost> {
        match a {
            SemiringElement::Cost(c) if c.is_inf() || c.0 <= self.cap => Ok(c),
            SemiringElement::Cost(c) => {
                Err(Error::SemiringMismatch(format!("{c} exceeds the cap {}", self.cap)))
            }
            other => Err(Error::SemiringMismatch(format!("{other:?} is not a min-plus element"))),
        }
    }
    fn elements(&self) -> Option<Vec<Cost>> {
        if self.cap > 1 << 16 {
            return None;
        }
        let mut all: Vec<Cost> = (0..=self.cap).map(Cost).collect();
        all.push(Cost::INF);
        Some(all)
    }
}

/// Run-time choice of semiring instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SemiringDescriptor {
    Boolean,
    CappedMinPlus { cap: u64 },
}

/// Run-time typed semiring element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SemiringElement {
    Bool(bool),
    Cost(Cost),
}

impl fmt::Display for SemiringElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemiringElement::Bool(b) => write!(f, "{}", u8::from(*b)),
            SemiringElement::Cost(c) => write!(f, "{c}"),
        }
    }
}

macro_rules! dispatch2 {
    ($desc:expr, $a:expr, $b:expr, |$s:ident, $x:ident, $y:ident| $body:expr) => {
        match *$desc {
            SemiringDescriptor::Boolean => {
                let $s = Boolean;
                let ($x, $y) = ($s.from_element($a)?, $s.from_element($b)?);
                Ok($s.to_element($body))
            }
            SemiringDescriptor::CappedMinPlus { cap } => {
                let $s = CappedMinPlus::new(cap)?;
                let ($x, $y) = ($s.from_element($a)?, $s.from_element($b)?);
                Ok($s.to_element($body))
            }
        }
    };
}

impl SemiringDescriptor {
    pub fn zero(&self) -> SemiringElement {
        match *self {
            SemiringDescriptor::Boolean => SemiringElement::Bool(false),
            SemiringDescriptor::CappedMinPlus { .. } => SemiringElement::Cost(Cost::INF),
        }
    }

    pub fn one(&self) -> SemiringElement {
        match *self {
            SemiringDescriptor::Boolean => SemiringElement::Bool(true),
            SemiringDescriptor::CappedMinPlus { .. } => SemiringElement::Cost(Cost(0)),
        }
    }

    pub fn add(&self, a: SemiringElement, b: SemiringElement) -> Result<SemiringElement> {
        dispatch2!(self, a, b, |s, x, y| s.add(x, y))
    }

    pub fn mul(&self, a: SemiringElement, b: SemiringElement) -> Result<SemiringElement> {
        dispatch2!(self, a, b, |s, x, y| s.mul(x, y))
    }

    pub fn leq(&self, a: SemiringElement, b: SemiringElement) -> Result<bool> {
        let sum = self.add(a, b)?;
        Ok(sum == a)
    }

    pub fn lcu(&self, values: &[SemiringElement]) -> Result<SemiringElement> {
        match *self {
            SemiringDescriptor::Boolean => {
                let s = Boolean;
                let xs = values.iter().map(|&v| s.from_element(v)).collect::<Result<Vec<_>>>()?;
                Ok(s.to_element(s.lcu_all(xs)))
            }
            SemiringDescriptor::CappedMinPlus { cap } => {
                let s = CappedMinPlus::new(cap)?;
                let xs = values.iter().map(|&v| s.from_element(v)).collect::<Result<Vec<_>>>()?;
                Ok(s.to_element(s.lcu_all(xs)))
            }
        }
    }

    /// Parses `0`/`1` for Boolean, a decimal integer or `INF` for min-plus.
    pub fn parse_element(&self, text: &str) -> Result<SemiringElement> {
        let text = text.trim();
        match *self {
            SemiringDescriptor::Boolean => match text {
                "0" => Ok(SemiringElement::Bool(false)),
                "1" => Ok(SemiringElement::Bool(true)),
                _ => Err(Error::Usage(format!("`{text}` is not a Boolean element"))),
            },
            SemiringDescriptor::CappedMinPlus { cap } => {
                let s = CappedMinPlus::new(cap)?;
                if text.eq_ignore_ascii_case("inf") {
                    return Ok(SemiringElement::Cost(Cost::INF));
                }
                let v: u64 = text
                    .parse()
                    .map_err(|_| Error::Usage(format!("`{text}` is not a min-plus element")))?;
                Ok(SemiringElement::Cost(s.elem(v)))
            }
        }
    }
}
