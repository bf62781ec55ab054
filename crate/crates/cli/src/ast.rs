use std::collections::BTreeSet;

use denscalc_core::symcore::Q;

use crate::error::Pos;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Int(i64),
    /// Coordinate, opaque symbol or previously declared value.
    Name(String, Pos),
    /// The weight variable `t`.
    Weight,
    /// The weight operator `L`.
    WeightOp,
    /// `D(var)`.
    Partial(String, Pos),
    /// `d(expr, var)`.
    Derivative(Box<Expr>, String, Pos),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>, Pos),
    Pow(Box<Expr>, Box<Expr>, Pos),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CheckKind {
    SelfadjointPencil,
    Roundtrip,
    DoMap,
    TransformConsistency,
    GroupoidArrow,
    Cocycle,
    Schwarzian,
    Sturm,
    BvIdentity,
    Jacobi,
    KhudianNilpotent,
    Darboux,
    Berezinian,
}

impl CheckKind {
    pub const ALL: [CheckKind; 13] = [
        CheckKind::SelfadjointPencil,
        CheckKind::Roundtrip,
        CheckKind::DoMap,
        CheckKind::TransformConsistency,
        CheckKind::GroupoidArrow,
        CheckKind::Cocycle,
        CheckKind::Schwarzian,
        CheckKind::Sturm,
        CheckKind::BvIdentity,
        CheckKind::Jacobi,
        CheckKind::KhudianNilpotent,
        CheckKind::Darboux,
        CheckKind::Berezinian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::SelfadjointPencil => "selfadjoint_pencil",
            CheckKind::Roundtrip => "roundtrip",
            CheckKind::DoMap => "do_map",
            CheckKind::TransformConsistency => "transform_consistency",
            CheckKind::GroupoidArrow => "groupoid_arrow",
            CheckKind::Cocycle => "cocycle",
            CheckKind::Schwarzian => "schwarzian",
            CheckKind::Sturm => "sturm",
            CheckKind::BvIdentity => "bv_identity",
            CheckKind::Jacobi => "jacobi",
            CheckKind::KhudianNilpotent => "khudian_nilpotent",
            CheckKind::Darboux => "darboux",
            CheckKind::Berezinian => "berezinian",
        }
    }

    pub fn from_name(s: &str) -> Option<CheckKind> {
        CheckKind::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Expected argument kinds, in order.
    pub fn signature(self) -> &'static [ArgKind] {
        use ArgKind::*;
        match self {
            CheckKind::SelfadjointPencil | CheckKind::Darboux | CheckKind::Jacobi => &[Pencil],
            CheckKind::Roundtrip => &[Operator, Rational, Rational],
            CheckKind::DoMap => &[Operator, Rational, Rational],
            CheckKind::TransformConsistency => &[Pencil, Transition],
            CheckKind::GroupoidArrow => &[Pencil, Connection, Connection],
            CheckKind::Cocycle => &[Pencil, Connection, Connection, Connection],
            CheckKind::Schwarzian => &[Transition],
            CheckKind::Sturm => &[Connection, Transition],
            CheckKind::BvIdentity => &[Chart, Function, Function],
            CheckKind::KhudianNilpotent => &[Chart],
            CheckKind::Berezinian => &[Matrix, Matrix],
        }
    }
}

/// What a declared name denotes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArgKind {
    Chart,
    Function,
    Density,
    Operator,
    Connection,
    Pencil,
    Transition,
    Matrix,
    Opaque,
    Rational,
}

impl ArgKind {
    pub fn describe(self) -> &'static str {
        match self {
            ArgKind::Chart => "chart",
            ArgKind::Function => "function",
            ArgKind::Density => "density",
            ArgKind::Operator => "operator",
            ArgKind::Connection => "connection",
            ArgKind::Pencil => "pencil",
            ArgKind::Transition => "transition",
            ArgKind::Matrix => "matrix",
            ArgKind::Opaque => "opaque symbol",
            ArgKind::Rational => "rational",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Arg {
    Name(String),
    Rational(Q),
}

impl Arg {
    pub fn render(&self) -> String {
        match self {
            Arg::Name(s) => s.clone(),
            Arg::Rational(q) => q.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PencilSpec {
    /// `gamma` is the upper connection, `theta` explicit.
    Upper { gamma: Vec<Expr>, theta: Expr },
    /// `gamma_lower`; the upper connection and θ are contracted with `S`.
    Lower { gamma: Vec<Expr> },
}

#[derive(Clone, Debug, PartialEq)]
pub enum RandomSpec {
    Pencil { delta: Q, parity: u32 },
    Operator { weight: Q },
}

#[derive(Clone, Debug, PartialEq)]
pub enum DeclKind {
    Chart { even: Vec<String>, odd: Vec<String> },
    Opaque { chart: Option<String>, depends: Option<Vec<String>>, positive: bool },
    Let { chart: String, expr: Expr },
    Density { chart: String, expr: Expr },
    Operator { chart: String, expr: Expr },
    Connection { chart: String, comps: Vec<Expr> },
    Pencil { chart: String, delta: Q, s: Vec<Vec<Expr>>, spec: PencilSpec },
    Transition { from: String, to: String, forward: Option<Vec<Expr>>, backward: Vec<Expr> },
    Matrix { chart: String, even: usize, rows: Vec<Vec<Expr>> },
    Random { chart: String, spec: RandomSpec },
    Check { kind: CheckKind, args: Vec<Arg> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decl {
    /// Declared name; for checks, the report label.
    pub name: String,
    pub pos: Pos,
    pub kind: DeclKind,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Session {
    pub decls: Vec<Decl>,
    /// Grammar productions used while parsing.
    pub productions: BTreeSet<&'static str>,
}

impl Session {
    pub fn checks(&self) -> impl Iterator<Item = (&Decl, CheckKind, &[Arg])> {
        self.decls.iter().filter_map(|d| match &d.kind {
            DeclKind::Check { kind, args } => Some((d, *kind, args.as_slice())),
            _ => None,
        })
    }
}

/// Every production the parser can record.
pub const PRODUCTIONS: &[&str] = &[
    "decl.chart",
    "decl.opaque",
    "decl.opaque.depends",
    "decl.opaque.positive",
    "decl.opaque.constant",
    "decl.let",
    "decl.density",
    "decl.operator",
    "decl.connection",
    "decl.pencil.upper",
    "decl.pencil.lower",
    "decl.transition",
    "decl.transition.backward_only",
    "decl.matrix",
    "decl.random.pencil",
    "decl.random.operator",
    "decl.check",
    "decl.check.label",
    "expr.int",
    "expr.name",
    "expr.weight",
    "expr.weight_op",
    "expr.partial",
    "expr.derivative",
    "expr.neg",
    "expr.add",
    "expr.sub",
    "expr.mul",
    "expr.div",
    "expr.pow",
    "expr.paren",
    "arg.rational",
    "check.selfadjoint_pencil",
    "check.roundtrip",
    "check.do_map",
    "check.transform_consistency",
    "check.groupoid_arrow",
    "check.cocycle",
    "check.schwarzian",
    "check.sturm",
    "check.bv_identity",
    "check.jacobi",
    "check.khudian_nilpotent",
    "check.darboux",
    "check.berezinian",
];
