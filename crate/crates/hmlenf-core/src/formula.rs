//! recHML formulae.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use crate::cond::{Renaming, Subst};
use crate::error::Result;
use crate::pattern::{restrict, SymEvent};
use crate::solver::Solver;
use crate::value::{sym, Sym};

/// A recHML formula.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Tt,
    Ff,
    Var(Sym),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Nec(SymEvent, Box<Formula>),
    Pos(SymEvent, Box<Formula>),
    Max(Sym, Box<Formula>),
    Min(Sym, Box<Formula>),
}

/// Syntactic fragment of a formula, from most to least specific.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SubsetTag {
    ShmlNormalForm,
    Shml,
    Chml,
    Mhml,
    General,
}

impl SubsetTag {
    pub fn name(self) -> &'static str {
        match self {
            SubsetTag::ShmlNormalForm => "sHML-normal-form",
            SubsetTag::Shml => "sHML",
            SubsetTag::Chml => "cHML",
            SubsetTag::Mhml => "mHML",
            SubsetTag::General => "general",
        }
    }

    pub fn is_shml(self) -> bool {
        matches!(self, SubsetTag::ShmlNormalForm | SubsetTag::Shml)
    }
}

impl fmt::Display for SubsetTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A name derived from `base` that is not in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<Sym>) -> Sym {
    let stem = base.split('_').next().unwrap_or(base);
    let mut k = 1;
    loop {
        let s = sym(&format!("{stem}_{k}"));
        if !avoid.contains(&s) {
            return s;
        }
        k += 1;
    }
}

impl Formula {
    pub fn nec(eta: SymEvent, f: Formula) -> Formula {
        Formula::Nec(eta, Box::new(f))
    }

    pub fn max(x: &str, f: Formula) -> Formula {
        Formula::Max(sym(x), Box::new(f))
    }

    /// Conjunction that flattens, drops `tt` and absorbs into `ff`.
    pub fn and_all<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
        let mut out = Vec::new();
        for f in items {
            match f {
                Formula::Tt => {}
                Formula::Ff => return Formula::Ff,
                Formula::And(fs) => out.extend(fs),
                f => out.push(f),
            }
        }
        match out.len() {
            0 => Formula::Tt,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    pub fn free_lvars(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        self.collect_free_lvars(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free_lvars(&self, bound: &mut Vec<Sym>, out: &mut BTreeSet<Sym>) {
        match self {
            Formula::Tt | Formula::Ff => {}
            Formula::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Formula::And(fs) | Formula::Or(fs) => {
                fs.iter().for_each(|f| f.collect_free_lvars(bound, out))
            }
            Formula::Nec(_, f) | Formula::Pos(_, f) => f.collect_free_lvars(bound, out),
            Formula::Max(x, f) | Formula::Min(x, f) => {
                bound.push(x.clone());
                f.collect_free_lvars(bound, out);
                bound.pop();
            }
        }
    }

    /// Free data variables.
    pub fn free_data(&self) -> BTreeSet<Sym> {
        match self {
            Formula::Tt | Formula::Ff | Formula::Var(_) => BTreeSet::new(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().flat_map(Formula::free_data).collect(),
            Formula::Nec(e, f) | Formula::Pos(e, f) => {
                let mut out = e.refs();
                out.extend(f.free_data().into_iter().filter(|x| !e.binders.contains(x)));
                out
            }
            Formula::Max(_, f) | Formula::Min(_, f) => f.free_data(),
        }
    }

    /// Every data variable name occurring anywhere.
    pub fn data_names(&self, out: &mut BTreeSet<Sym>) {
        match self {
            Formula::Tt | Formula::Ff | Formula::Var(_) => {}
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.data_names(out)),
            Formula::Nec(e, f) | Formula::Pos(e, f) => {
                out.extend(e.pattern.vars());
                e.cond.collect_vars(out);
                f.data_names(out);
            }
            Formula::Max(_, f) | Formula::Min(_, f) => f.data_names(out),
        }
    }

    /// Every logical variable name occurring anywhere.
    pub fn lvar_names(&self, out: &mut BTreeSet<Sym>) {
        match self {
            Formula::Tt | Formula::Ff => {}
            Formula::Var(x) => {
                out.insert(x.clone());
            }
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.lvar_names(out)),
            Formula::Nec(_, f) | Formula::Pos(_, f) => f.lvar_names(out),
            Formula::Max(x, f) | Formula::Min(x, f) => {
                out.insert(x.clone());
                f.lvar_names(out);
            }
        }
    }

    fn map_children(&self, mut g: impl FnMut(&Formula) -> Formula) -> Formula {
        match self {
            Formula::Tt | Formula::Ff | Formula::Var(_) => self.clone(),
            Formula::And(fs) => Formula::And(fs.iter().map(g).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(g).collect()),
            Formula::Nec(e, f) => Formula::Nec(e.clone(), Box::new(g(f))),
            Formula::Pos(e, f) => Formula::Pos(e.clone(), Box::new(g(f))),
            Formula::Max(x, f) => Formula::Max(x.clone(), Box::new(g(f))),
            Formula::Min(x, f) => Formula::Min(x.clone(), Box::new(g(f))),
        }
    }

    /// Applies a value substitution to free data variables.
    pub fn subst_data(&self, s: &Subst) -> Formula {
        if s.is_empty() {
            return self.clone();
        }
        match self {
            Formula::Nec(e, f) => {
                Formula::Nec(e.subst(s), Box::new(f.subst_data(&restrict(s, &e.binders))))
            }
            Formula::Pos(e, f) => {
                Formula::Pos(e.subst(s), Box::new(f.subst_data(&restrict(s, &e.binders))))
            }
            _ => self.map_children(|f| f.subst_data(s)),
        }
    }

    /// Renames free data variables.
    pub fn rename_free_data(&self, r: &Renaming) -> Formula {
        if r.is_empty() {
            return self.clone();
        }
        let inner = |e: &SymEvent| -> Renaming {
            r.iter()
                .filter(|(k, _)| !e.binders.contains(*k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect()
        };
        match self {
            Formula::Nec(e, f) => {
                Formula::Nec(e.rename_refs(r), Box::new(f.rename_free_data(&inner(e))))
            }
            Formula::Pos(e, f) => {
                Formula::Pos(e.rename_refs(r), Box::new(f.rename_free_data(&inner(e))))
            }
            _ => self.map_children(|f| f.rename_free_data(r)),
        }
    }

    /// Renames free logical variables.
    pub fn rename_free_lvars(&self, r: &Renaming) -> Formula {
        match self {
            Formula::Var(x) => Formula::Var(r.get(x).cloned().unwrap_or_else(|| x.clone())),
            Formula::Max(x, f) | Formula::Min(x, f) if r.contains_key(x) => {
                let mut r2 = r.clone();
                r2.remove(x);
                let body = Box::new(f.rename_free_lvars(&r2));
                match self {
                    Formula::Max(..) => Formula::Max(x.clone(), body),
                    _ => Formula::Min(x.clone(), body),
                }
            }
            _ => self.map_children(|f| f.rename_free_lvars(r)),
        }
    }

    /// Capture-avoiding substitution of `psi` for the free logical variable `x`.
    pub fn subst_lvar(&self, x: &Sym, psi: &Formula) -> Formula {
        let fd = psi.free_data();
        let fl = psi.free_lvars();
        self.subst_lvar_with(x, psi, &fd, &fl)
    }

    fn subst_lvar_with(
        &self,
        x: &Sym,
        psi: &Formula,
        fd: &BTreeSet<Sym>,
        fl: &BTreeSet<Sym>,
    ) -> Formula {
        match self {
            Formula::Var(y) if y == x => psi.clone(),
            Formula::Tt | Formula::Ff | Formula::Var(_) => self.clone(),
            Formula::Nec(e, f) | Formula::Pos(e, f) => {
                let (e, f) = if e.binders.iter().any(|b| fd.contains(b)) {
                    let mut avoid = fd.clone();
                    f.data_names(&mut avoid);
                    avoid.extend(e.pattern.vars());
                    e.cond.collect_vars(&mut avoid);
                    let mut r = Renaming::new();
                    for b in e.binders.iter().filter(|b| fd.contains(*b)) {
                        let n = fresh_name(b, &avoid);
                        avoid.insert(n.clone());
                        r.insert(b.clone(), n);
                    }
                    (e.rename(&r), f.rename_free_data(&r))
                } else {
                    (e.clone(), (**f).clone())
                };
                let body = Box::new(f.subst_lvar_with(x, psi, fd, fl));
                match self {
                    Formula::Nec(..) => Formula::Nec(e, body),
                    _ => Formula::Pos(e, body),
                }
            }
            Formula::Max(y, _) | Formula::Min(y, _) if y == x => self.clone(),
            Formula::Max(y, f) | Formula::Min(y, f) => {
                let (y, f) = if fl.contains(y) {
                    let mut avoid = fl.clone();
                    f.lvar_names(&mut avoid);
                    avoid.insert(x.clone());
                    let n = fresh_name(y, &avoid);
                    let r = Renaming::from([(y.clone(), n.clone())]);
                    (n, f.rename_free_lvars(&r))
                } else {
                    (y.clone(), (**f).clone())
                };
                let body = Box::new(f.subst_lvar_with(x, psi, fd, fl));
                match self {
                    Formula::Max(..) => Formula::Max(y, body),
                    _ => Formula::Min(y, body),
                }
            }
            _ => self.map_children(|f| f.subst_lvar_with(x, psi, fd, fl)),
        }
    }

    /// One-step unfolding of an outermost fixpoint.
    pub fn unfold(&self) -> Formula {
        match self {
            Formula::Max(x, f) | Formula::Min(x, f) => f.subst_lvar(x, self),
            _ => self.clone(),
        }
    }

    pub fn is_shml(&self) -> bool {
        match self {
            Formula::Tt | Formula::Ff | Formula::Var(_) => true,
            Formula::And(fs) => fs.iter().all(Formula::is_shml),
            Formula::Nec(_, f) | Formula::Max(_, f) => f.is_shml(),
            _ => false,
        }
    }

    pub fn is_chml(&self) -> bool {
        match self {
            Formula::Tt | Formula::Ff | Formula::Var(_) => true,
            Formula::Or(fs) => fs.iter().all(Formula::is_chml),
            Formula::Pos(_, f) | Formula::Min(_, f) => f.is_chml(),
            _ => false,
        }
    }

    /// Every recursion variable occurs under a modality relative to its binder.
    pub fn is_guarded(&self) -> bool {
        fn go(f: &Formula, unguarded: &BTreeSet<Sym>) -> bool {
            match f {
                Formula::Tt | Formula::Ff => true,
                Formula::Var(x) => !unguarded.contains(x),
                Formula::And(fs) | Formula::Or(fs) => fs.iter().all(|g| go(g, unguarded)),
                Formula::Nec(_, g) | Formula::Pos(_, g) => go(g, &BTreeSet::new()),
                Formula::Max(x, g) | Formula::Min(x, g) => {
                    let mut u = unguarded.clone();
                    u.insert(x.clone());
                    go(g, &u)
                }
            }
        }
        go(self, &BTreeSet::new())
    }

    /// sHML normal form: guarded, and every conjunction is a set of necessities with
    /// pairwise disjoint guards.
    pub fn is_normal_form(&self, solver: &Solver) -> Result<bool> {
        if !self.is_shml() || !self.is_guarded() {
            return Ok(false);
        }
        self.normal_shape(solver)
    }

    fn normal_shape(&self, solver: &Solver) -> Result<bool> {
        Ok(match self {
            Formula::Tt | Formula::Ff | Formula::Var(_) => true,
            Formula::Max(_, f) | Formula::Nec(_, f) => f.normal_shape(solver)?,
            Formula::And(fs) => {
                let mut guards = Vec::new();
                for f in fs {
                    match f {
                        Formula::Nec(e, g) => {
                            if !g.normal_shape(solver)? {
                                return Ok(false);
                            }
                            guards.push(e);
                        }
                        _ => return Ok(false),
                    }
                }
                for i in 0..guards.len() {
                    for j in i + 1..guards.len() {
                        if !solver.disjoint(guards[i], guards[j])? {
                            return Ok(false);
                        }
                    }
                }
                true
            }
            _ => false,
        })
    }

    /// Most specific syntactic fragment.
    pub fn classify(&self) -> Result<SubsetTag> {
        self.classify_with(&Solver::default())
    }

    pub fn classify_with(&self, solver: &Solver) -> Result<SubsetTag> {
        Ok(if self.is_shml() {
            if self.is_normal_form(solver)? {
                SubsetTag::ShmlNormalForm
            } else {
                SubsetTag::Shml
            }
        } else if self.is_chml() {
            SubsetTag::Chml
        } else {
            SubsetTag::General
        })
    }

    /// Renames fixpoint binders so that each is bound once and differs from free names.
    pub fn alpha_unique(&self) -> Formula {
        fn go(f: &Formula, used: &mut BTreeSet<Sym>) -> Formula {
            match f {
                Formula::Max(x, g) | Formula::Min(x, g) => {
                    let (name, body) = if used.contains(x) {
                        let n = fresh_name(x, used);
                        let r = Renaming::from([(x.clone(), n.clone())]);
                        (n, g.rename_free_lvars(&r))
                    } else {
                        (x.clone(), (**g).clone())
                    };
                    used.insert(name.clone());
                    let body = Box::new(go(&body, used));
                    match f {
                        Formula::Max(..) => Formula::Max(name, body),
                        _ => Formula::Min(name, body),
                    }
                }
                _ => f.map_children(|g| go(g, used)),
            }
        }
        let mut used = self.free_lvars();
        go(self, &mut used)
    }

    /// Renames every binder to a name determined by its position, so alpha-equivalent
    /// formulae become equal.
    pub fn canonical_names(&self) -> Formula {
        struct Ctx {
            lv: usize,
            dv: usize,
        }
        fn go(f: &Formula, lvars: &Renaming, data: &Renaming, ctx: &mut Ctx) -> Formula {
            match f {
                Formula::Var(x) => Formula::Var(lvars.get(x).cloned().unwrap_or_else(|| x.clone())),
                Formula::Max(x, g) | Formula::Min(x, g) => {
                    ctx.lv += 1;
                    let n = sym(&alloc::format!("L{}", ctx.lv));
                    let mut inner = lvars.clone();
                    inner.insert(x.clone(), n.clone());
                    let body = Box::new(go(g, &inner, data, ctx));
                    match f {
                        Formula::Max(..) => Formula::Max(n, body),
                        _ => Formula::Min(n, body),
                    }
                }
                Formula::Nec(e, g) | Formula::Pos(e, g) => {
                    let mut r: Renaming = e
                        .refs()
                        .into_iter()
                        .filter_map(|x| data.get(&x).map(|y| (x, y.clone())))
                        .collect();
                    let mut inner = data.clone();
                    let order: Vec<Sym> = e
                        .pattern
                        .slots()
                        .iter()
                        .filter_map(|s| s.var().cloned())
                        .collect();
                    for b in order.iter().chain(e.binders.iter()) {
                        if e.binders.contains(b) && !r.contains_key(b) {
                            ctx.dv += 1;
                            let n = sym(&alloc::format!("d{}", ctx.dv));
                            r.insert(b.clone(), n.clone());
                            inner.insert(b.clone(), n);
                        }
                    }
                    let e2 = e.rename(&r);
                    let body = Box::new(go(g, lvars, &inner, ctx));
                    match f {
                        Formula::Nec(..) => Formula::Nec(e2, body),
                        _ => Formula::Pos(e2, body),
                    }
                }
                _ => f.map_children(|g| go(g, lvars, data, ctx)),
            }
        }
        go(
            self,
            &Renaming::new(),
            &Renaming::new(),
            &mut Ctx { lv: 0, dv: 0 },
        )
    }

    pub fn alpha_eq(&self, other: &Formula) -> bool {
        self.canonical_names() == other.canonical_names()
    }

    /// Renames data binders that shadow an enclosing binder of the same name.
    pub fn unshadow(&self) -> Formula {
        fn go(f: &Formula, scope: &BTreeSet<Sym>) -> Formula {
            match f {
                Formula::Nec(e, g) | Formula::Pos(e, g) => {
                    let (e2, g2) = unshadow_prefix(
                        e,
                        &**g,
                        scope,
                        |g, r| g.rename_free_data(r),
                        |g, out| g.data_names(out),
                    );
                    let mut inner = scope.clone();
                    inner.extend(e2.binders.iter().cloned());
                    let body = Box::new(go(&g2, &inner));
                    match f {
                        Formula::Nec(..) => Formula::Nec(e2, body),
                        _ => Formula::Pos(e2, body),
                    }
                }
                _ => f.map_children(|g| go(g, scope)),
            }
        }
        go(self, &self.free_data())
    }
}

/// Renames the binders of `e` that clash with `scope`, in `e` and in its continuation.
pub(crate) fn unshadow_prefix<T: Clone>(
    e: &SymEvent,
    body: &T,
    scope: &BTreeSet<Sym>,
    rename_body: impl Fn(&T, &Renaming) -> T,
    names: impl Fn(&T, &mut BTreeSet<Sym>),
) -> (SymEvent, T) {
    if e.binders.iter().all(|b| !scope.contains(b)) {
        return (e.clone(), body.clone());
    }
    let mut avoid = scope.clone();
    names(body, &mut avoid);
    avoid.extend(e.pattern.vars());
    e.cond.collect_vars(&mut avoid);
    let mut r = Renaming::new();
    for b in e.binders.iter().filter(|b| scope.contains(*b)) {
        let n = fresh_name(b, &avoid);
        avoid.insert(n.clone());
        r.insert(b.clone(), n);
    }
    (e.rename(&r), rename_body(body, &r))
}

fn ends_open(f: &Formula) -> bool {
    match f {
        Formula::Max(..) | Formula::Min(..) => true,
        Formula::Nec(_, g) | Formula::Pos(_, g) => ends_open(g),
        _ => false,
    }
}

fn write_raw(f: &Formula, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    match f {
        Formula::Tt => out.write_str("tt"),
        Formula::Ff => out.write_str("ff"),
        Formula::Var(x) => out.write_str(x),
        Formula::Nec(e, g) | Formula::Pos(e, g) => {
            let (l, r) = if matches!(f, Formula::Nec(..)) {
                ('[', ']')
            } else {
                ('<', '>')
            };
            write!(out, "{l}{e}{r}")?;
            if matches!(**g, Formula::And(_) | Formula::Or(_)) {
                out.write_str("(")?;
                write_raw(g, out)?;
                out.write_str(")")
            } else {
                write_raw(g, out)
            }
        }
        Formula::Max(x, g) | Formula::Min(x, g) => {
            let kw = if matches!(f, Formula::Max(..)) {
                "max"
            } else {
                "min"
            };
            write!(out, "{kw} {x}.")?;
            write_raw(g, out)
        }
        Formula::And(fs) | Formula::Or(fs) => {
            let is_and = matches!(f, Formula::And(_));
            for (i, g) in fs.iter().enumerate() {
                if i > 0 {
                    out.write_str(if is_and { " & " } else { " | " })?;
                }
                let wrap = match g {
                    Formula::And(_) => true,
                    Formula::Or(_) => is_and,
                    _ => ends_open(g) && i + 1 < fs.len(),
                };
                if wrap {
                    out.write_str("(")?;
                    write_raw(g, out)?;
                    out.write_str(")")?;
                } else {
                    write_raw(g, out)?;
                }
            }
            Ok(())
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_raw(&self.unshadow(), f)
    }
}
