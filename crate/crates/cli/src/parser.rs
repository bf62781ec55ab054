//! Recursive-descent parser for session files. Names are resolved while
//! parsing: every name must be declared before it is used.

use std::collections::{BTreeMap, BTreeSet};

use denscalc_core::symcore::{q, Q};

use crate::ast::*;
use crate::error::{CliError, Pos};
use crate::lexer::{lex, Tok, Token};

/// Names that expressions treat specially.
const RESERVED: &[&str] = &["t", "L", "D", "d"];

#[derive(Clone, Debug)]
struct Entry {
    kind: ArgKind,
    /// Chart the value lives on; `None` for charts and constants.
    chart: Option<String>,
}

#[derive(Clone, Debug)]
struct ChartInfo {
    even: Vec<String>,
    odd: Vec<String>,
}

struct Parser {
    toks: Vec<Token>,
    i: usize,
    names: BTreeMap<String, Entry>,
    charts: BTreeMap<String, ChartInfo>,
    labels: BTreeSet<String>,
    productions: BTreeSet<&'static str>,
}

type PResult<T> = Result<T, CliError>;

pub fn parse_session(text: &str) -> PResult<Session> {
    let mut p = Parser {
        toks: lex(text)?,
        i: 0,
        names: BTreeMap::new(),
        charts: BTreeMap::new(),
        labels: BTreeSet::new(),
        productions: BTreeSet::new(),
    };
    let mut decls = Vec::new();
    while p.peek() != &Tok::Eof {
        decls.push(p.decl()?);
    }
    Ok(Session { decls, productions: p.productions })
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        if t.tok != Tok::Eof {
            self.i += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(CliError::parse(self.pos(), msg))
    }

    fn describe(t: &Tok) -> String {
        match t {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Int(n) => format!("'{n}'"),
            Tok::Punct(c) => format!("'{c}'"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn expect(&mut self, c: char) -> PResult<()> {
        if self.peek() == &Tok::Punct(c) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected '{c}', found {}", Self::describe(self.peek())))
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == &Tok::Punct(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> PResult<(String, Pos)> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok((s, pos))
            }
            t => self.err(format!("expected a name, found {}", Self::describe(&t))),
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<()> {
        match self.peek() {
            Tok::Ident(s) if s == kw => {
                self.bump();
                Ok(())
            }
            t => self.err(format!("expected '{kw}', found {}", Self::describe(t))),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn use_(&mut self, p: &'static str) {
        self.productions.insert(p);
    }

    fn fresh(&mut self, name: &str, pos: Pos, kind: ArgKind, chart: Option<String>) -> PResult<()> {
        if self.names.contains_key(name) {
            return Err(CliError::parse(pos, format!("'{name}' is already declared")));
        }
        if RESERVED.contains(&name) {
            return Err(CliError::parse(pos, format!("'{name}' is reserved")));
        }
        for (c, info) in &self.charts {
            if info.even.iter().chain(&info.odd).any(|v| v == name) {
                return Err(CliError::parse(pos, format!("'{name}' is a coordinate of chart {c}")));
            }
        }
        self.names.insert(name.into(), Entry { kind, chart });
        Ok(())
    }

    fn lookup(&self, name: &str, pos: Pos, want: ArgKind) -> PResult<&Entry> {
        let e = self.names.get(name).ok_or_else(|| CliError::parse(pos, format!("undefined name '{name}'")))?;
        if e.kind != want {
            return Err(CliError::parse(
                pos,
                format!("'{name}' is a {}, expected a {}", e.kind.describe(), want.describe()),
            ));
        }
        Ok(e)
    }

    fn chart_ref(&mut self) -> PResult<String> {
        let (c, pos) = self.ident()?;
        self.lookup(&c, pos, ArgKind::Chart)?;
        Ok(c)
    }

    fn rational(&mut self) -> PResult<Q> {
        let neg = self.eat('-');
        let pos = self.pos();
        let n = match self.bump().tok {
            Tok::Int(n) => n,
            t => return Err(CliError::parse(pos, format!("expected a rational, found {}", Self::describe(&t)))),
        };
        let d = if self.eat('/') {
            let pos = self.pos();
            match self.bump().tok {
                Tok::Int(0) => return Err(CliError::parse(pos, "zero denominator")),
                Tok::Int(d) => d,
                t => return Err(CliError::parse(pos, format!("expected a denominator, found {}", Self::describe(&t)))),
            }
        } else {
            1
        };
        Ok(q(if neg { -n } else { n }, d))
    }

    fn decl(&mut self) -> PResult<Decl> {
        let pos = self.pos();
        let (kw, _) = self.ident()?;
        match kw.as_str() {
            "chart" => self.chart_decl(pos),
            "opaque" => self.opaque_decl(pos),
            "let" | "density" | "operator" => self.value_decl(pos, &kw),
            "connection" => self.connection_decl(pos),
            "pencil" => self.pencil_decl(pos),
            "transition" => self.transition_decl(pos),
            "matrix" => self.matrix_decl(pos),
            "random" => self.random_decl(pos),
            "check" => self.check_decl(pos),
            _ => Err(CliError::parse(pos, format!("unknown declaration '{kw}'"))),
        }
    }

    fn name_list(&mut self) -> PResult<Vec<(String, Pos)>> {
        let mut out = vec![self.ident()?];
        while self.eat(',') {
            out.push(self.ident()?);
        }
        Ok(out)
    }

    /// `chart C { even x, y; odd a; }`
    fn chart_decl(&mut self, pos: Pos) -> PResult<Decl> {
        self.use_("decl.chart");
        let (name, npos) = self.ident()?;
        self.fresh(&name, npos, ArgKind::Chart, None)?;
        self.expect('{')?;
        let (mut even, mut odd) = (Vec::new(), Vec::new());
        while !self.eat('}') {
            let (kw, kpos) = self.ident()?;
            let list = self.name_list()?;
            self.expect(';')?;
            let target = match kw.as_str() {
                "even" => &mut even,
                "odd" => &mut odd,
                _ => return Err(CliError::parse(kpos, format!("expected 'even' or 'odd', found '{kw}'"))),
            };
            target.extend(list);
        }
        let mut seen = BTreeSet::new();
        for (v, vpos) in even.iter().chain(&odd) {
            if RESERVED.contains(&v.as_str()) {
                return Err(CliError::parse(*vpos, format!("'{v}' is reserved")));
            }
            if !seen.insert(v.clone()) || self.names.contains_key(v) {
                return Err(CliError::parse(*vpos, format!("'{v}' is already declared")));
            }
        }
        let even: Vec<String> = even.into_iter().map(|x| x.0).collect();
        let odd: Vec<String> = odd.into_iter().map(|x| x.0).collect();
        self.charts.insert(name.clone(), ChartInfo { even: even.clone(), odd: odd.clone() });
        self.expect_end_optional();
        Ok(Decl { name, pos, kind: DeclKind::Chart { even, odd } })
    }

    fn expect_end_optional(&mut self) {
        self.eat(';');
    }

    /// `opaque rho on C depends(x) positive;` or `opaque a;` for a constant.
    fn opaque_decl(&mut self, pos: Pos) -> PResult<Decl> {
        self.use_("decl.opaque");
        let (name, npos) = self.ident()?;
        let mut chart = None;
        let mut depends = None;
        if self.at_keyword("on") {
            self.bump();
            let c = self.chart_ref()?;
            if self.at_keyword("depends") {
                self.use_("decl.opaque.depends");
                self.bump();
                self.expect('(')?;
                let list = self.name_list()?;
                self.expect(')')?;
                let info = &self.charts[&c];
                for (v, vpos) in &list {
                    if !info.even.contains(v) {
                        return Err(CliError::parse(*vpos, format!("'{v}' is not an even coordinate of {c}")));
                    }
                }
                depends = Some(list.into_iter().map(|x| x.0).collect());
            }
            chart = Some(c);
        } else {
            self.use_("decl.opaque.constant");
        }
        let positive = self.at_keyword("positive");
        if positive {
            self.use_("decl.opaque.positive");
            self.bump();
        }
        self.expect(';')?;
        self.fresh(&name, npos, ArgKind::Opaque, chart.clone())?;
        Ok(Decl { name, pos, kind: DeclKind::Opaque { chart, depends, positive } })
    }

    /// `let f on C = expr;`, `density r on C = expr;`, `operator A on C = expr;`
    fn value_decl(&mut self, pos: Pos, kw: &str) -> PResult<Decl> {
        let (name, npos) = self.ident()?;
        self.keyword("on")?;
        let chart = self.chart_ref()?;
        self.expect('=')?;
        let expr = self.expr(&chart)?;
        self.expect(';')?;
        let (kind, ak) = match kw {
            "let" => {
                self.use_("decl.let");
                (DeclKind::Let { chart: chart.clone(), expr }, ArgKind::Function)
            }
            "density" => {
                self.use_("decl.density");
                (DeclKind::Density { chart: chart.clone(), expr }, ArgKind::Density)
            }
            _ => {
                self.use_("decl.operator");
                (DeclKind::Operator { chart: chart.clone(), expr }, ArgKind::Operator)
            }
        };
        self.fresh(&name, npos, ak, Some(chart))?;
        Ok(Decl { name, pos, kind })
    }

    fn expr_list(&mut self, chart: &str) -> PResult<Vec<Expr>> {
        self.expect('[')?;
        let mut out = Vec::new();
        if !self.eat(']') {
            out.push(self.expr(chart)?);
            while self.eat(',') {
                out.push(self.expr(chart)?);
            }
            self.expect(']')?;
        }
        Ok(out)
    }

    fn expr_matrix(&mut self, chart: &str) -> PResult<Vec<Vec<Expr>>> {
        self.expect('[')?;
        let mut out = vec![self.expr_list(chart)?];
        while self.eat(',') {
            out.push(self.expr_list(chart)?);
        }
        self.expect(']')?;
        Ok(out)
    }

    fn dim(&self, chart: &str) -> usize {
        let c = &self.charts[chart];
        c.even.len() + c.odd.len()
    }

    fn check_len(&self, pos: Pos, got: usize, want: usize, what: &str) -> PResult<()> {
        if got != want {
            return Err(CliError::parse(pos, format!("{what} needs {want} entries, found {got}")));
        }
        Ok(())
    }

    /// `connection G on C = [e1, e2];` (lower components)
    fn connection_decl(&mut self, pos: Pos) -> PResult<Decl> {
        self.use_("decl.connection");
        let (name, npos) = self.ident()?;
        self.keyword("on")?;
        let chart = self.chart_ref()?;
        self.expect('=')?;
        let lpos = self.pos();
        let comps = self.expr_list(&chart)?;
        self.check_len(lpos, comps.len(), self.dim(&chart), "connection")?;
        self.expect(';')?;
        self.fresh(&name, npos, ArgKind::Connection, Some(chart.clone()))?;
        Ok(Decl { name, pos, kind: DeclKind::Connection { chart, comps } })
    }

    /// `pencil P on C delta 1/2 { S = [[..]]; gamma = [..]; theta = e; }` or with
    /// `gamma_lower = [..]` in place of `gamma` and `theta`.
    fn pencil_decl(&mut self, pos: Pos) -> PResult<Decl> {
        let (name, npos) = self.ident()?;
        self.keyword("on")?;
        let chart = self.chart_ref()?;
        self.keyword("delta")?;
        let delta = self.rational()?;
        self.expect('{')?;
        let n = self.dim(&chart);
        let (mut s, mut gamma, mut lower, mut theta) = (None, None, None, None);
        while !self.eat('}') {
            let (field, fpos) = self.ident()?;
            self.expect('=')?;
            let vpos = self.pos();
            match field.as_str() {
                "S" => {
                    let m = self.expr_matrix(&chart)?;
                    self.check_len(vpos, m.len(), n, "S")?;
                    for r in &m {
                        self.check_len(vpos, r.len(), n, "each row of S")?;
                    }
                    s = Some(m);
                }
                "gamma" => {
                    let v = self.expr_list(&chart)?;
                    self.check_len(vpos, v.len(), n, "gamma")?;
                    gamma = Some(v);
                }
                "gamma_lower" => {
                    let v = self.expr_list(&chart)?;
                    self.check_len(vpos, v.len(), n, "gamma_lower")?;
                    lower = Some(v);
                }
                "theta" => theta = Some(self.expr(&chart)?),
                _ => return Err(CliError::parse(fpos, format!("unknown pencil field '{field}'"))),
            }
            self.expect(';')?;
        }
        let s = s.ok_or_else(|| CliError::parse(pos, "pencil needs S"))?;
        let spec = match (gamma, theta, lower) {
            (g, t, Some(l)) if g.is_none() && t.is_none() => {
                self.use_("decl.pencil.lower");
                PencilSpec::Lower { gamma: l }
            }
            (g, t, None) => {
                self.use_("decl.pencil.upper");
                PencilSpec::Upper {
                    gamma: g.unwrap_or_else(|| vec![Expr::Int(0); n]),
                    theta: t.unwrap_or(Expr::Int(0)),
                }
            }
            _ => return Err(CliError::parse(pos, "gamma_lower excludes gamma and theta")),
        };
        self.fresh(&name, npos, ArgKind::Pencil, Some(chart.clone()))?;
        Ok(Decl { name, pos, kind: DeclKind::Pencil { chart, delta, s, spec } })
    }

    /// `transition T from C to E { forward = [..]; backward = [..]; }`;
    /// `forward` is in the variables of `C`, `backward` in those of `E`.
    fn transition_decl(&mut self, pos: Pos) -> PResult<Decl> {
        self.use_("decl.transition");
        let (name, npos) = self.ident()?;
        self.keyword("from")?;
        let from = self.chart_ref()?;
        self.keyword("to")?;
        let to = self.chart_ref()?;
        let n = self.charts[&from].even.len();
        for c in [&from, &to] {
            if !self.charts[c].odd.is_empty() || self.charts[c].even.len() != n {
                return Err(CliError::parse(pos, "transitions join even charts of equal dimension"));
            }
        }
        self.expect('{')?;
        let (mut forward, mut backward) = (None, None);
        while !self.eat('}') {
            let (field, fpos) = self.ident()?;
            self.expect('=')?;
            let vpos = self.pos();
            match field.as_str() {
                "forward" => {
                    let v = self.expr_list(&from)?;
                    self.check_len(vpos, v.len(), n, "forward")?;
                    forward = Some(v);
                }
                "backward" => {
                    let v = self.expr_list(&to)?;
                    self.check_len(vpos, v.len(), n, "backward")?;
                    backward = Some(v);
                }
                _ => return Err(CliError::parse(fpos, format!("unknown transition field '{field}'"))),
            }
            self.expect(';')?;
        }
        let backward = backward.ok_or_else(|| CliError::parse(pos, "transition needs backward"))?;
        if forward.is_none() {
            self.use_("decl.transition.backward_only");
        }
        self.fresh(&name, npos, ArgKind::Transition, Some(from.clone()))?;
        Ok(Decl { name, pos, kind: DeclKind::Transition { from, to, forward, backward } })
    }

    /// `matrix M on C even 1 = [[..], [..]];`
    fn matrix_decl(&mut self, pos: Pos) -> PResult<Decl> {
        self.use_("decl.matrix");
        let (name, npos) = self.ident()?;
        self.keyword("on")?;
        let chart = self.chart_ref()?;
        self.keyword("even")?;
        let epos = self.pos();
        let even = match self.bump().tok {
            Tok::Int(n) if n >= 0 => n as usize,
            t => return Err(CliError::parse(epos, format!("expected a block size, found {}", Self::describe(&t)))),
        };
        self.expect('=')?;
        let mpos = self.pos();
        let rows = self.expr_matrix(&chart)?;
        for r in &rows {
            self.check_len(mpos, r.len(), rows.len(), "each row")?;
        }
        if even > rows.len() {
            return Err(CliError::parse(epos, "even block is larger than the matrix"));
        }
        self.expect(';')?;
        self.fresh(&name, npos, ArgKind::Matrix, Some(chart.clone()))?;
        Ok(Decl { name, pos, kind: DeclKind::Matrix { chart, even, rows } })
    }

    /// `random pencil P on C delta 1/3 parity 0;` or `random operator A on C weight 0;`
    fn random_decl(&mut self, pos: Pos) -> PResult<Decl> {
        let (what, wpos) = self.ident()?;
        let (name, npos) = self.ident()?;
        self.keyword("on")?;
        let chart = self.chart_ref()?;
        let (spec, kind) = match what.as_str() {
            "pencil" => {
                self.use_("decl.random.pencil");
                self.keyword("delta")?;
                let delta = self.rational()?;
                let mut parity = 0;
                if self.at_keyword("parity") {
                    self.bump();
                    let ppos = self.pos();
                    parity = match self.bump().tok {
                        Tok::Int(p @ 0..=1) => p as u32,
                        t => return Err(CliError::parse(ppos, format!("parity is 0 or 1, found {}", Self::describe(&t)))),
                    };
                }
                (RandomSpec::Pencil { delta, parity }, ArgKind::Pencil)
            }
            "operator" => {
                self.use_("decl.random.operator");
                self.keyword("weight")?;
                (RandomSpec::Operator { weight: self.rational()? }, ArgKind::Operator)
            }
            _ => return Err(CliError::parse(wpos, format!("cannot generate a random '{what}'"))),
        };
        self.expect(';')?;
        self.fresh(&name, npos, kind, Some(chart.clone()))?;
        Ok(Decl { name, pos, kind: DeclKind::Random { chart, spec } })
    }

    /// `check <kind> <args> [as <label>];`
    fn check_decl(&mut self, pos: Pos) -> PResult<Decl> {
        self.use_("decl.check");
        let (kname, kpos) = self.ident()?;
        let kind = CheckKind::from_name(&kname)
            .ok_or_else(|| CliError::parse(kpos, format!("unknown check kind '{kname}'")))?;
        self.productions.insert(check_production(kind));
        let mut args = Vec::new();
        for want in kind.signature() {
            let apos = self.pos();
            if *want == ArgKind::Rational {
                self.use_("arg.rational");
                args.push(Arg::Rational(self.rational()?));
            } else {
                let (a, _) = self.ident()?;
                self.lookup(&a, apos, *want)?;
                args.push(Arg::Name(a));
            }
        }
        let name = if self.at_keyword("as") {
            self.use_("decl.check.label");
            self.bump();
            self.ident()?.0
        } else {
            format!("{}({})", kind.name(), args.iter().map(Arg::render).collect::<Vec<_>>().join(","))
        };
        if !self.labels.insert(name.clone()) {
            return Err(CliError::parse(pos, format!("duplicate check name '{name}'")));
        }
        self.expect(';')?;
        Ok(Decl { name, pos, kind: DeclKind::Check { kind, args } })
    }

    // expressions

    fn expr(&mut self, chart: &str) -> PResult<Expr> {
        let mut lhs = self.term(chart)?;
        loop {
            let pos = self.pos();
            let op = if self.eat('+') {
                self.use_("expr.add");
                BinOp::Add
            } else if self.eat('-') {
                self.use_("expr.sub");
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term(chart)?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs), pos);
        }
    }

    fn term(&mut self, chart: &str) -> PResult<Expr> {
        let mut lhs = self.unary(chart)?;
        loop {
            let pos = self.pos();
            let op = if self.eat('*') {
                self.use_("expr.mul");
                BinOp::Mul
            } else if self.eat('/') {
                self.use_("expr.div");
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary(chart)?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs), pos);
        }
    }

    fn unary(&mut self, chart: &str) -> PResult<Expr> {
        if self.eat('-') {
            self.use_("expr.neg");
            return Ok(Expr::Neg(Box::new(self.unary(chart)?)));
        }
        let base = self.atom(chart)?;
        let pos = self.pos();
        if self.eat('^') {
            self.use_("expr.pow");
            let exp = self.unary(chart)?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp), pos));
        }
        Ok(base)
    }

    fn coordinate(&mut self, chart: &str) -> PResult<String> {
        let (v, pos) = self.ident()?;
        let info = &self.charts[chart];
        if !info.even.contains(&v) && !info.odd.contains(&v) {
            return Err(CliError::parse(pos, format!("'{v}' is not a coordinate of {chart}")));
        }
        Ok(v)
    }

    fn atom(&mut self, chart: &str) -> PResult<Expr> {
        let pos = self.pos();
        match self.bump().tok {
            Tok::Int(n) => {
                self.use_("expr.int");
                Ok(Expr::Int(n))
            }
            Tok::Punct('(') => {
                self.use_("expr.paren");
                let e = self.expr(chart)?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(s) => match s.as_str() {
                "t" => {
                    self.use_("expr.weight");
                    Ok(Expr::Weight)
                }
                "L" => {
                    self.use_("expr.weight_op");
                    Ok(Expr::WeightOp)
                }
                "D" => {
                    self.use_("expr.partial");
                    self.expect('(')?;
                    let v = self.coordinate(chart)?;
                    self.expect(')')?;
                    Ok(Expr::Partial(v, pos))
                }
                "d" => {
                    self.use_("expr.derivative");
                    self.expect('(')?;
                    let e = self.expr(chart)?;
                    self.expect(',')?;
                    let v = self.coordinate(chart)?;
                    self.expect(')')?;
                    Ok(Expr::Derivative(Box::new(e), v, pos))
                }
                _ => {
                    self.use_("expr.name");
                    self.resolve_expr_name(&s, pos, chart)?;
                    Ok(Expr::Name(s, pos))
                }
            },
            t => Err(CliError::parse(pos, format!("expected an expression, found {}", Self::describe(&t)))),
        }
    }

    fn resolve_expr_name(&self, s: &str, pos: Pos, chart: &str) -> PResult<()> {
        let info = &self.charts[chart];
        if info.even.iter().chain(&info.odd).any(|v| v == s) {
            return Ok(());
        }
        let e = self.names.get(s).ok_or_else(|| CliError::parse(pos, format!("undefined name '{s}'")))?;
        match e.kind {
            ArgKind::Opaque | ArgKind::Function | ArgKind::Density | ArgKind::Operator => {}
            k => return Err(CliError::parse(pos, format!("'{s}' is a {} and cannot appear in an expression", k.describe()))),
        }
        match &e.chart {
            Some(c) if c != chart => Err(CliError::parse(pos, format!("'{s}' lives on chart {c}, not {chart}"))),
            _ => Ok(()),
        }
    }
}

fn check_production(k: CheckKind) -> &'static str {
    PRODUCTIONS
        .iter()
        .copied()
        .find(|p| p.strip_prefix("check.") == Some(k.name()))
        .expect("every check kind has a production")
}
