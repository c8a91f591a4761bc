//! GLTL: temporal logic whose operators expire with a per-step probability.
//!
//! A formula is translated to its event form, an LTL formula over the original
//! propositions plus one fresh event proposition per expiring operator
//! ([`event_form`]). Satisfaction probability is then the measure of event
//! streams under which the LTL formula holds ([`GltlObjective`]).

mod eval;
mod objective;
mod parse;

use std::fmt;
use std::ops::Range;

use crate::rational::Rational;

pub use eval::{ltl_eval, naive_ltl_eval};
pub use objective::{simultaneous_expiration_check, EventStream, GltlObjective};
pub use parse::{parse_gltl, parse_ltl};

#[derive(Debug, Clone)]
pub struct Gltl {
    pub kind: GltlKind,
    /// Byte range in the source text; empty for constructed nodes.
    pub span: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GltlKind {
    Atom(String),
    Not(Box<Gltl>),
    And(Box<Gltl>, Box<Gltl>),
    Or(Box<Gltl>, Box<Gltl>),
    Next(Box<Gltl>),
    Always(Rational, Box<Gltl>),
    Eventually(Rational, Box<Gltl>),
    Until(Rational, Box<Gltl>, Box<Gltl>),
}

/// Structural equality; spans are ignored.
impl PartialEq for Gltl {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Gltl {}

impl Gltl {
    pub fn new(kind: GltlKind) -> Self {
        Gltl { kind, span: 0..0 }
    }

    pub fn atom(name: &str) -> Self {
        Self::new(GltlKind::Atom(name.to_string()))
    }

    pub fn not(a: Gltl) -> Self {
        Self::new(GltlKind::Not(Box::new(a)))
    }

    pub fn and(a: Gltl, b: Gltl) -> Self {
        Self::new(GltlKind::And(Box::new(a), Box::new(b)))
    }

    pub fn or(a: Gltl, b: Gltl) -> Self {
        Self::new(GltlKind::Or(Box::new(a), Box::new(b)))
    }

    pub fn next(a: Gltl) -> Self {
        Self::new(GltlKind::Next(Box::new(a)))
    }

    pub fn always(theta: Rational, a: Gltl) -> Self {
        Self::new(GltlKind::Always(theta, Box::new(a)))
    }

    pub fn eventually(theta: Rational, a: Gltl) -> Self {
        Self::new(GltlKind::Eventually(theta, Box::new(a)))
    }

    pub fn until(theta: Rational, a: Gltl, b: Gltl) -> Self {
        Self::new(GltlKind::Until(theta, Box::new(a), Box::new(b)))
    }

    /// Atom names in order of first appearance.
    pub fn atoms(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.visit(&mut |n| {
            if let GltlKind::Atom(a) = &n.kind {
                if !out.contains(a) {
                    out.push(a.clone());
                }
            }
        });
        out
    }

    /// Number of expiring operators.
    pub fn expiring_count(&self) -> usize {
        let mut count = 0;
        self.visit(&mut |n| {
            if matches!(
                n.kind,
                GltlKind::Always(..) | GltlKind::Eventually(..) | GltlKind::Until(..)
            ) {
                count += 1;
            }
        });
        count
    }

    /// Largest number of `X` operators on a root-to-leaf path.
    pub fn next_depth(&self) -> usize {
        match &self.kind {
            GltlKind::Atom(_) => 0,
            GltlKind::Next(a) => 1 + a.next_depth(),
            GltlKind::Not(a) | GltlKind::Always(_, a) | GltlKind::Eventually(_, a) => a.next_depth(),
            GltlKind::And(a, b) | GltlKind::Or(a, b) | GltlKind::Until(_, a, b) => {
                a.next_depth().max(b.next_depth())
            }
        }
    }

    pub fn depth(&self) -> usize {
        match &self.kind {
            GltlKind::Atom(_) => 0,
            GltlKind::Not(a) | GltlKind::Next(a) | GltlKind::Always(_, a) | GltlKind::Eventually(_, a) => {
                1 + a.depth()
            }
            GltlKind::And(a, b) | GltlKind::Or(a, b) | GltlKind::Until(_, a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    /// Pre-order traversal.
    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Gltl)) {
        f(self);
        match &self.kind {
            GltlKind::Atom(_) => {}
            GltlKind::Not(a) | GltlKind::Next(a) | GltlKind::Always(_, a) | GltlKind::Eventually(_, a) => {
                a.visit(f)
            }
            GltlKind::And(a, b) | GltlKind::Or(a, b) | GltlKind::Until(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Ltl {
    Atom(String),
    Not(Box<Ltl>),
    And(Box<Ltl>, Box<Ltl>),
    Or(Box<Ltl>, Box<Ltl>),
    Next(Box<Ltl>),
    Always(Box<Ltl>),
    Eventually(Box<Ltl>),
    Until(Box<Ltl>, Box<Ltl>),
}

impl Ltl {
    pub fn atom(name: &str) -> Self {
        Ltl::Atom(name.to_string())
    }

    pub fn not(a: Ltl) -> Self {
        Ltl::Not(Box::new(a))
    }

    pub fn and(a: Ltl, b: Ltl) -> Self {
        Ltl::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Ltl, b: Ltl) -> Self {
        Ltl::Or(Box::new(a), Box::new(b))
    }

    pub fn next(a: Ltl) -> Self {
        Ltl::Next(Box::new(a))
    }

    pub fn always(a: Ltl) -> Self {
        Ltl::Always(Box::new(a))
    }

    pub fn eventually(a: Ltl) -> Self {
        Ltl::Eventually(Box::new(a))
    }

    pub fn until(a: Ltl, b: Ltl) -> Self {
        Ltl::Until(Box::new(a), Box::new(b))
    }

    pub fn atoms(&self) -> Vec<String> {
        fn go(f: &Ltl, out: &mut Vec<String>) {
            match f {
                Ltl::Atom(a) => {
                    if !out.contains(a) {
                        out.push(a.clone());
                    }
                }
                Ltl::Not(a) | Ltl::Next(a) | Ltl::Always(a) | Ltl::Eventually(a) => go(a, out),
                Ltl::And(a, b) | Ltl::Or(a, b) | Ltl::Until(a, b) => {
                    go(a, out);
                    go(b, out);
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    pub fn temporal_count(&self) -> usize {
        match self {
            Ltl::Atom(_) => 0,
            Ltl::Not(a) => a.temporal_count(),
            Ltl::Next(a) | Ltl::Always(a) | Ltl::Eventually(a) => 1 + a.temporal_count(),
            Ltl::And(a, b) | Ltl::Or(a, b) => a.temporal_count() + b.temporal_count(),
            Ltl::Until(a, b) => 1 + a.temporal_count() + b.temporal_count(),
        }
    }
}

/// Event propositions with their per-step trigger probabilities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventProfile {
    pub events: Vec<String>,
    pub theta: Vec<Rational>,
}

impl EventProfile {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// `Θ = Π θ_i` (1 when there are no events).
    pub fn joint_trigger(&self) -> Rational {
        self.theta.iter().fold(crate::rational::int(1), |acc, t| acc * t)
    }
}

/// The event form `T(φ)` and the events it introduced, named `e0, e1, ...`
/// in pre-order (names that clash with atoms of `φ` are skipped).
pub fn event_form(phi: &Gltl) -> (Ltl, EventProfile) {
    let atoms = phi.atoms();
    let mut profile = EventProfile {
        events: Vec::new(),
        theta: Vec::new(),
    };
    let mut counter = 0usize;
    let mut fresh = |theta: &Rational, profile: &mut EventProfile| -> Ltl {
        loop {
            let name = format!("e{counter}");
            counter += 1;
            if !atoms.contains(&name) {
                profile.events.push(name.clone());
                profile.theta.push(theta.clone());
                return Ltl::Atom(name);
            }
        }
    };
    fn go(
        f: &Gltl,
        profile: &mut EventProfile,
        fresh: &mut impl FnMut(&Rational, &mut EventProfile) -> Ltl,
    ) -> Ltl {
        match &f.kind {
            GltlKind::Atom(a) => Ltl::Atom(a.clone()),
            GltlKind::Not(a) => Ltl::not(go(a, profile, fresh)),
            GltlKind::And(a, b) => {
                let a = go(a, profile, fresh);
                Ltl::and(a, go(b, profile, fresh))
            }
            GltlKind::Or(a, b) => {
                let a = go(a, profile, fresh);
                Ltl::or(a, go(b, profile, fresh))
            }
            GltlKind::Next(a) => Ltl::next(go(a, profile, fresh)),
            GltlKind::Always(theta, a) => {
                let e = fresh(theta, profile);
                let t = go(a, profile, fresh);
                Ltl::until(t.clone(), Ltl::and(t, e))
            }
            GltlKind::Eventually(theta, a) => {
                let e = fresh(theta, profile);
                Ltl::until(Ltl::not(e), go(a, profile, fresh))
            }
            GltlKind::Until(theta, a, b) => {
                let e = fresh(theta, profile);
                let a = go(a, profile, fresh);
                let b = go(b, profile, fresh);
                Ltl::until(Ltl::and(a, Ltl::not(e)), b)
            }
        }
    }
    let ltl = go(phi, &mut profile, &mut fresh);
    (ltl, profile)
}

// Precedence levels used by the printers: | < & < U < unary.
const OR: u8 = 1;
const AND: u8 = 2;
const UNTIL: u8 = 3;
const UNARY: u8 = 4;

fn paren(f: &mut fmt::Formatter<'_>, need: bool, body: impl FnOnce(&mut fmt::Formatter<'_>) -> fmt::Result) -> fmt::Result {
    if need {
        write!(f, "(")?;
    }
    body(f)?;
    if need {
        write!(f, ")")?;
    }
    Ok(())
}

impl Gltl {
    fn prec(&self) -> u8 {
        match self.kind {
            GltlKind::Or(..) => OR,
            GltlKind::And(..) => AND,
            GltlKind::Until(..) => UNTIL,
            _ => UNARY,
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        paren(f, self.prec() < min, |f| match &self.kind {
            GltlKind::Atom(a) => write!(f, "{a}"),
            GltlKind::Not(a) => {
                write!(f, "!")?;
                a.write(f, UNARY)
            }
            GltlKind::Next(a) => {
                write!(f, "X ")?;
                a.write(f, UNARY)
            }
            GltlKind::Always(t, a) => {
                write!(f, "G[{t}] ")?;
                a.write(f, UNARY)
            }
            GltlKind::Eventually(t, a) => {
                write!(f, "F[{t}] ")?;
                a.write(f, UNARY)
            }
            GltlKind::And(a, b) => {
                a.write(f, AND)?;
                write!(f, " & ")?;
                b.write(f, AND + 1)
            }
            GltlKind::Or(a, b) => {
                a.write(f, OR)?;
                write!(f, " | ")?;
                b.write(f, OR + 1)
            }
            GltlKind::Until(t, a, b) => {
                a.write(f, UNTIL + 1)?;
                write!(f, " U[{t}] ")?;
                b.write(f, UNTIL)
            }
        })
    }
}

impl fmt::Display for Gltl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, 0)
    }
}

impl Ltl {
    fn prec(&self) -> u8 {
        match self {
            Ltl::Or(..) => OR,
            Ltl::And(..) => AND,
            Ltl::Until(..) => UNTIL,
            _ => UNARY,
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        paren(f, self.prec() < min, |f| match self {
            Ltl::Atom(a) => write!(f, "{a}"),
            Ltl::Not(a) => {
                write!(f, "!")?;
                a.write(f, UNARY)
            }
            Ltl::Next(a) => {
                write!(f, "X ")?;
                a.write(f, UNARY)
            }
            Ltl::Always(a) => {
                write!(f, "G ")?;
                a.write(f, UNARY)
            }
            Ltl::Eventually(a) => {
                write!(f, "F ")?;
                a.write(f, UNARY)
            }
            Ltl::And(a, b) => {
                a.write(f, AND)?;
                write!(f, " & ")?;
                b.write(f, AND + 1)
            }
            Ltl::Or(a, b) => {
                a.write(f, OR)?;
                write!(f, " | ")?;
                b.write(f, OR + 1)
            }
            Ltl::Until(a, b) => {
                a.write(f, UNTIL + 1)?;
                write!(f, " U ")?;
                b.write(f, UNTIL)
            }
        })
    }
}

impl fmt::Display for Ltl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, 0)
    }
}
