//! Parsers for every surface syntax.
//!
//! Data variables follow lexical scope: a pattern variable already bound by an enclosing
//! prefix is a reference, any other pattern variable is a new binder. Condition variables
//! must be bound.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::cond::{CmpOp, Cond, Term};
use crate::enforcer::Enforcer;
use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::monitor::{Monitor, Verdict};
use crate::pattern::{Pattern, Slot, SymEvent, SymTrans};
use crate::process::Process;
use crate::value::{sym, Action, Dir, Event, Sym, Value};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Upper(String),
    DVar(String),
    Int(i64),
    Sym(&'static str),
    Eof,
}

const SYMBOLS: [&str; 21] = [
    "->", "&&", "||", "!=", "<=", ">=", "?", "!", "(", ")", "[", "]", "<", ">", ".", "+", "&", "|",
    "=", ",", "{",
];

fn lex(src: &str) -> Result<Vec<(Tok, usize, usize)>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, col, msg: String| Error::Parse { line, col, msg };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let start = (line, col);
        let ident_end = |mut j: usize| {
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            j
        };
        let tok;
        let mut j;
        if c == '$' {
            j = ident_end(i + 1);
            if j == i + 1 {
                return Err(err(
                    line,
                    col,
                    "expected variable name after '$'".to_string(),
                ));
            }
            tok = Tok::DVar(chars[i + 1..j].iter().collect());
        } else if c.is_ascii_digit()
            || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            j = i + 1;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let text: String = chars[i..j].iter().collect();
            let n = text
                .parse::<i64>()
                .map_err(|_| err(line, col, format!("integer out of range: {text}")))?;
            tok = Tok::Int(n);
        } else if c.is_ascii_uppercase() {
            j = ident_end(i);
            if chars.get(j) == Some(&'{') {
                while j < chars.len() && chars[j] != '}' {
                    j += 1;
                }
                if j == chars.len() {
                    return Err(err(line, col, "unterminated variable index".to_string()));
                }
                j += 1;
            }
            tok = Tok::Upper(chars[i..j].iter().collect());
        } else if c.is_ascii_lowercase() || c == '_' {
            j = ident_end(i);
            tok = Tok::Ident(chars[i..j].iter().collect());
        } else if c == '}' {
            j = i + 1;
            tok = Tok::Sym("}");
        } else {
            let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
            match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
                Some(s) => {
                    j = i + s.len();
                    tok = Tok::Sym(s);
                }
                None => return Err(err(line, col, format!("unexpected character '{c}'"))),
            }
        }
        col += j - i;
        i = j;
        out.push((tok, start.0, start.1));
    }
    out.push((Tok::Eof, line, col));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    scope: Vec<Sym>,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) | Tok::Upper(s) => format!("'{s}'"),
        Tok::DVar(s) => format!("'${s}'"),
        Tok::Int(n) => format!("'{n}'"),
        Tok::Sym(s) => format!("'{s}'"),
        Tok::Eof => "end of input".to_string(),
    }
}

impl Parser {
    fn new(src: &str) -> Result<Parser> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
            scope: Vec::new(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T> {
        let (_, line, col) = &self.toks[self.pos];
        Err(Error::Parse {
            line: *line,
            col: *col,
            msg: msg.into(),
        })
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T> {
        self.error(format!(
            "expected {wanted}, found {}",
            describe(self.peek())
        ))
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(t) if t == k)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.unexpected(&format!("'{s}'"))
        }
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if self.is_kw(k) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn finish(&self) -> Result<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.unexpected("end of input")
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.unexpected(what),
        }
    }

    fn value(&mut self) -> Result<Value> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Value::Int(n))
            }
            Tok::Ident(a) => {
                self.bump();
                if self.eat_sym("(") {
                    let inner = self.value()?;
                    self.expect_sym(")")?;
                    match Value::tagged(&a, inner) {
                        Some(v) => Ok(v),
                        None => self.error("tagged values nest at most one level"),
                    }
                } else {
                    Ok(Value::atom(&a))
                }
            }
            _ => self.unexpected("a value"),
        }
    }

    fn slot(&mut self, allow_tag: bool) -> Result<Slot> {
        match self.peek().clone() {
            Tok::DVar(x) => {
                self.bump();
                Ok(Slot::Var(sym(&x)))
            }
            Tok::Ident(t) if allow_tag && *self.peek2() == Tok::Sym("(") => {
                let save = self.pos;
                self.bump();
                self.bump();
                if let Tok::DVar(x) = self.peek().clone() {
                    self.bump();
                    self.expect_sym(")")?;
                    return Ok(Slot::Tag(sym(&t), sym(&x)));
                }
                self.pos = save;
                Ok(Slot::Val(self.value()?))
            }
            _ => Ok(Slot::Val(self.value()?)),
        }
    }

    fn pattern(&mut self, allow_tag: bool) -> Result<Pattern> {
        let subject = match self.peek().clone() {
            Tok::DVar(x) => {
                self.bump();
                Slot::Var(sym(&x))
            }
            Tok::Ident(a) => {
                self.bump();
                Slot::Val(Value::atom(&a))
            }
            _ => return self.unexpected("an event subject"),
        };
        let dir = if self.eat_sym("?") {
            Dir::In
        } else if self.eat_sym("!") {
            Dir::Out
        } else {
            return self.unexpected("'?' or '!'");
        };
        let payload = if self.eat_sym("(") {
            let s = self.slot(allow_tag)?;
            self.expect_sym(")")?;
            s
        } else {
            self.slot(allow_tag)?
        };
        Ok(Pattern::new(dir, subject, payload))
    }

    fn event(&mut self) -> Result<Event> {
        let p = self.pattern(false)?;
        match p.instantiate(&Default::default()) {
            Some(e) => Ok(e),
            None => self.error(format!("event {p} must be concrete")),
        }
    }

    fn action(&mut self) -> Result<Action> {
        if self.eat_kw("tau") {
            Ok(Action::Tau)
        } else {
            Ok(Action::Ev(self.event()?))
        }
    }

    // conditions

    fn cond(&mut self) -> Result<Cond> {
        let mut items = alloc::vec![self.cond_and()?];
        while self.eat_sym("||") {
            items.push(self.cond_and()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Cond::Or(items)
        })
    }

    fn cond_and(&mut self) -> Result<Cond> {
        let mut items = alloc::vec![self.cond_not()?];
        while self.eat_sym("&&") {
            items.push(self.cond_not()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Cond::And(items)
        })
    }

    fn cond_not(&mut self) -> Result<Cond> {
        if self.eat_sym("!") {
            return Ok(Cond::Not(Box::new(self.cond_not()?)));
        }
        if self.eat_sym("(") {
            let c = self.cond()?;
            self.expect_sym(")")?;
            return Ok(c);
        }
        for (k, c) in [
            ("tt", Cond::True),
            ("true", Cond::True),
            ("ff", Cond::False),
            ("false", Cond::False),
        ] {
            if self.is_kw(k) && !matches!(self.peek2(), Tok::Sym("(")) {
                self.bump();
                return Ok(c);
            }
        }
        let lhs = self.term()?;
        if self.eat_kw("in") {
            return Ok(Cond::member(lhs, self.value_set()?, false));
        }
        if self.eat_kw("notin") {
            return Ok(Cond::member(lhs, self.value_set()?, true));
        }
        let op = match self.peek() {
            Tok::Sym("=") => CmpOp::Eq,
            Tok::Sym("!=") => CmpOp::Ne,
            Tok::Sym("<") => CmpOp::Lt,
            Tok::Sym("<=") => CmpOp::Le,
            Tok::Sym(">") => CmpOp::Gt,
            Tok::Sym(">=") => CmpOp::Ge,
            _ => return self.unexpected("a comparison operator"),
        };
        self.bump();
        let rhs = self.term()?;
        Ok(Cond::Cmp(lhs, op, rhs))
    }

    fn term(&mut self) -> Result<Term> {
        match self.peek().clone() {
            Tok::DVar(x) => {
                self.bump();
                Ok(Term::Var(sym(&x)))
            }
            _ => Ok(Term::Val(self.value()?)),
        }
    }

    fn value_set(&mut self) -> Result<Vec<Value>> {
        self.expect_sym("{")?;
        let mut out = Vec::new();
        if !self.eat_sym("}") {
            loop {
                out.push(self.value()?);
                if self.eat_sym("}") {
                    break;
                }
                self.expect_sym(",")?;
            }
        }
        Ok(out)
    }

    // symbolic events

    fn scope_set(&self) -> BTreeSet<Sym> {
        self.scope.iter().cloned().collect()
    }

    fn sym_event(&mut self) -> Result<SymEvent> {
        let pattern = self.pattern(false)?;
        let cond = if self.eat_kw("when") {
            self.cond()?
        } else {
            Cond::True
        };
        let ev = SymEvent::in_scope(pattern, cond, &self.scope_set());
        let mut known = self.scope_set();
        known.extend(ev.pattern.vars());
        if let Some(x) = ev.cond.vars().into_iter().find(|x| !known.contains(x)) {
            return self.error(format!("condition uses unbound variable ${x}"));
        }
        Ok(ev)
    }

    fn with_binders<T>(
        &mut self,
        b: &BTreeSet<Sym>,
        f: impl FnOnce(&mut Parser) -> Result<T>,
    ) -> Result<T> {
        let n = self.scope.len();
        self.scope.extend(b.iter().cloned());
        let r = f(self);
        self.scope.truncate(n);
        r
    }

    // formulae

    fn formula(&mut self) -> Result<Formula> {
        let mut items = alloc::vec![self.formula_and()?];
        while self.eat_sym("|") {
            items.push(self.formula_and()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Formula::Or(items)
        })
    }

    fn formula_and(&mut self) -> Result<Formula> {
        let mut items = alloc::vec![self.formula_unary()?];
        while self.eat_sym("&") {
            items.push(self.formula_unary()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Formula::And(items)
        })
    }

    fn formula_unary(&mut self) -> Result<Formula> {
        match self.peek().clone() {
            Tok::Ident(k) if k == "tt" => {
                self.bump();
                Ok(Formula::Tt)
            }
            Tok::Ident(k) if k == "ff" => {
                self.bump();
                Ok(Formula::Ff)
            }
            Tok::Ident(k) if k == "max" || k == "min" => {
                self.bump();
                let x = match self.bump() {
                    Tok::Upper(x) => sym(&x),
                    _ => {
                        self.pos -= 1;
                        return self.unexpected("a logical variable");
                    }
                };
                self.expect_sym(".")?;
                let body = Box::new(self.formula()?);
                Ok(if k == "max" {
                    Formula::Max(x, body)
                } else {
                    Formula::Min(x, body)
                })
            }
            Tok::Upper(x) => {
                self.bump();
                Ok(Formula::Var(sym(&x)))
            }
            Tok::Sym("(") => {
                self.bump();
                let f = self.formula()?;
                self.expect_sym(")")?;
                Ok(f)
            }
            Tok::Sym(open @ ("[" | "<")) => {
                self.bump();
                let ev = self.sym_event()?;
                self.expect_sym(if open == "[" { "]" } else { ">" })?;
                let binders = ev.binders.clone();
                let body = Box::new(self.with_binders(&binders, |p| p.formula_unary())?);
                Ok(if open == "[" {
                    Formula::Nec(ev, body)
                } else {
                    Formula::Pos(ev, body)
                })
            }
            _ => self.unexpected("a formula"),
        }
    }

    // processes

    fn process(&mut self) -> Result<Process> {
        let mut items = alloc::vec![self.process_prefix()?];
        while self.eat_sym("+") {
            items.push(self.process_prefix()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Process::Choice(items)
        })
    }

    fn process_prefix(&mut self) -> Result<Process> {
        if self.eat_sym("(") {
            let p = self.process()?;
            self.expect_sym(")")?;
            return Ok(p);
        }
        if self.eat_kw("nil") {
            return Ok(Process::Nil);
        }
        if self.eat_kw("rec") {
            let x = self.ident("a recursion variable")?;
            self.expect_sym(".")?;
            return Ok(Process::Rec(sym(&x), Box::new(self.process()?)));
        }
        let is_action = self.is_kw("tau") || matches!(self.peek2(), Tok::Sym("?" | "!"));
        if is_action {
            let a = self.action()?;
            self.expect_sym(".")?;
            return Ok(Process::Prefix(a, Box::new(self.process_prefix()?)));
        }
        let x = self.ident("a process")?;
        Ok(Process::Var(sym(&x)))
    }

    // monitors

    fn monitor(&mut self) -> Result<Monitor> {
        let mut items = alloc::vec![self.monitor_prefix()?];
        while self.eat_sym("+") {
            items.push(self.monitor_prefix()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Monitor::Choice(items)
        })
    }

    fn monitor_prefix(&mut self) -> Result<Monitor> {
        if self.eat_sym("(") {
            let m = self.monitor()?;
            self.expect_sym(")")?;
            return Ok(m);
        }
        for (k, v) in [
            ("yes", Verdict::Yes),
            ("no", Verdict::No),
            ("end", Verdict::End),
        ] {
            if self.eat_kw(k) {
                return Ok(Monitor::Verdict(v));
            }
        }
        if self.eat_kw("rec") {
            let x = self.ident("a recursion variable")?;
            self.expect_sym(".")?;
            return Ok(Monitor::Rec(sym(&x), Box::new(self.monitor()?)));
        }
        if self.eat_sym("<") {
            let ev = self.sym_event()?;
            self.expect_sym(">")?;
            self.expect_sym(".")?;
            let binders = ev.binders.clone();
            let body = self.with_binders(&binders, |p| p.monitor_prefix())?;
            return Ok(Monitor::Prefix(ev, Box::new(body)));
        }
        let x = self.ident("a monitor")?;
        Ok(Monitor::Var(sym(&x)))
    }

    // enforcers

    fn enforcer(&mut self) -> Result<Enforcer> {
        let mut items = alloc::vec![self.enforcer_prefix()?];
        while self.eat_sym("+") {
            items.push(self.enforcer_prefix()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Enforcer::Choice(items)
        })
    }

    fn enforcer_prefix(&mut self) -> Result<Enforcer> {
        if self.eat_sym("(") {
            let e = self.enforcer()?;
            self.expect_sym(")")?;
            return Ok(e);
        }
        if self.eat_kw("id") {
            return Ok(Enforcer::Id);
        }
        if self.eat_kw("rec") {
            let x = self.ident("a recursion variable")?;
            self.expect_sym(".")?;
            return Ok(Enforcer::Rec(sym(&x), Box::new(self.enforcer()?)));
        }
        if self.eat_sym("[") {
            let ev = self.sym_event()?;
            self.expect_sym("->")?;
            let rep = if self.eat_kw("tau") {
                None
            } else {
                Some(self.pattern(true)?)
            };
            let t = SymTrans::new(ev, rep);
            if !t.is_closed() {
                return self.error("replacement uses a variable not bound by the source pattern");
            }
            self.expect_sym("]")?;
            self.expect_sym(".")?;
            let binders = t.source.binders.clone();
            let body = self.with_binders(&binders, |p| p.enforcer_prefix())?;
            return Ok(Enforcer::Prefix(t, Box::new(body)));
        }
        let x = self.ident("an enforcer")?;
        Ok(Enforcer::Var(sym(&x)))
    }
}

fn run<T>(src: &str, f: impl FnOnce(&mut Parser) -> Result<T>) -> Result<T> {
    let mut p = Parser::new(src)?;
    let v = f(&mut p)?;
    p.finish()?;
    Ok(v)
}

pub fn parse_value(src: &str) -> Result<Value> {
    run(src, |p| p.value())
}

pub fn parse_cond(src: &str) -> Result<Cond> {
    run(src, |p| p.cond())
}

pub fn parse_pattern(src: &str) -> Result<Pattern> {
    run(src, |p| p.pattern(true))
}

/// Parses a symbolic event `pat when cond` whose pattern variables are all binders.
pub fn parse_sym_event(src: &str) -> Result<SymEvent> {
    run(src, |p| p.sym_event())
}

/// Parses a transformation `pat when cond -> pat'` or `... -> tau`.
pub fn parse_sym_trans(src: &str) -> Result<SymTrans> {
    run(src, |p| {
        let ev = p.sym_event()?;
        p.expect_sym("->")?;
        let rep = if p.eat_kw("tau") {
            None
        } else {
            Some(p.pattern(true)?)
        };
        let t = SymTrans::new(ev, rep);
        if !t.is_closed() {
            return p.error("replacement uses a variable not bound by the source pattern");
        }
        Ok(t)
    })
}

pub fn parse_event(src: &str) -> Result<Event> {
    run(src, |p| p.event())
}

pub fn parse_action(src: &str) -> Result<Action> {
    run(src, |p| p.action())
}

/// Parses a comma-separated list of events; the empty string is the empty trace.
pub fn parse_trace(src: &str) -> Result<Vec<Event>> {
    run(src, |p| {
        let mut out = Vec::new();
        if *p.peek() == Tok::Eof {
            return Ok(out);
        }
        loop {
            out.push(p.event()?);
            if !p.eat_sym(",") {
                return Ok(out);
            }
        }
    })
}

pub fn parse_formula(src: &str) -> Result<Formula> {
    run(src, |p| p.formula())
}

/// Parses a closed, guarded process.
pub fn parse_process(src: &str) -> Result<Process> {
    let p = run(src, |p| p.process())?;
    p.check()?;
    Ok(p)
}

pub fn parse_monitor(src: &str) -> Result<Monitor> {
    run(src, |p| p.monitor())
}

pub fn parse_enforcer(src: &str) -> Result<Enforcer> {
    run(src, |p| p.enforcer())
}

/// Whether `s` is reserved by the term syntax.
pub fn is_keyword(s: &str) -> bool {
    matches!(
        s,
        "ff" | "id"
            | "in"
            | "max"
            | "min"
            | "nil"
            | "notin"
            | "rec"
            | "tau"
            | "tt"
            | "when"
            | "yes"
            | "no"
            | "end"
            | "true"
            | "false"
    )
}
