//! A standalone model of ALFA: its own AST, a random generator of well-typed
//! closed terms, a syntax-directed type checker, a substitution-based
//! big-step interpreter and an environment-based evaluator.
//!
//! The checker and interpreter emit derivation trees named after the
//! built-in rules; nothing here calls into the engine's matcher.

use std::rc::Rc;

use deriver_core::document::{DerivNode, NodeId, RuleRef};
use deriver_core::term::{Judgment, Term};
use rand::Rng;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ty {
    Num,
    Bool,
    Arrow(Box<Ty>, Box<Ty>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Var(String),
    Num(i64),
    Bool(bool),
    Plus(Box<Expr>, Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    Fun(String, Ty, Box<Expr>),
    App(Box<Expr>, Box<Expr>),
    Let(String, Box<Expr>, Box<Expr>),
}

fn b<T>(t: T) -> Box<T> {
    Box::new(t)
}

impl Ty {
    pub fn arrow(a: Ty, r: Ty) -> Ty {
        Ty::Arrow(b(a), b(r))
    }

    pub fn to_term(&self) -> Term {
        match self {
            Ty::Num => Term::TNum,
            Ty::Bool => Term::TBool,
            Ty::Arrow(a, r) => Term::arrow(a.to_term(), r.to_term()),
        }
    }

    /// Depth of the smallest closed term of this type.
    fn min_depth(&self) -> usize {
        match self {
            Ty::Num | Ty::Bool => 0,
            Ty::Arrow(_, r) => 1 + r.min_depth(),
        }
    }
}

impl Expr {
    pub fn to_term(&self) -> Term {
        match self {
            Expr::Var(x) => Term::var(x.as_str()),
            Expr::Num(n) => Term::num(*n),
            Expr::Bool(v) => Term::Bool(*v),
            Expr::Plus(l, r) => Term::plus(l.to_term(), r.to_term()),
            Expr::If(c, t, e) => Term::if_(c.to_term(), t.to_term(), e.to_term()),
            Expr::Fun(x, ty, body) => Term::fun(x.as_str(), ty.to_term(), body.to_term()),
            Expr::App(f, a) => Term::app(f.to_term(), a.to_term()),
            Expr::Let(x, e1, e2) => Term::let_(x.as_str(), e1.to_term(), e2.to_term()),
        }
    }

    /// Constructor nesting depth; literals and variables have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Expr::Var(_) | Expr::Num(_) | Expr::Bool(_) => 0,
            Expr::Plus(l, r) | Expr::App(l, r) | Expr::Let(_, l, r) => 1 + l.depth().max(r.depth()),
            Expr::If(c, t, e) => 1 + c.depth().max(t.depth()).max(e.depth()),
            Expr::Fun(_, _, body) => 1 + body.depth(),
        }
    }

    pub fn is_value(&self) -> bool {
        matches!(self, Expr::Num(_) | Expr::Bool(_) | Expr::Fun(..))
    }
}

// ---- generation ----------------------------------------------------------

const NAMES: &[&str] = &["x", "y", "z", "f", "g"];

fn random_base(rng: &mut impl Rng) -> Ty {
    if rng.gen_bool(0.5) {
        Ty::Num
    } else {
        Ty::Bool
    }
}

/// A random type whose closed inhabitants fit in `depth`.
pub fn random_type(rng: &mut impl Rng, depth: usize) -> Ty {
    if depth == 0 || rng.gen_bool(0.6) {
        random_base(rng)
    } else {
        let arg = if rng.gen_bool(0.8) {
            random_base(rng)
        } else {
            Ty::arrow(random_base(rng), random_base(rng))
        };
        Ty::arrow(arg, random_type(rng, depth - 1))
    }
}

/// A closed well-typed term of at most `depth` constructor levels.
pub fn random_closed_term(rng: &mut impl Rng, depth: usize) -> (Expr, Ty) {
    let ty = random_type(rng, depth);
    let e = random_term(rng, &[], &ty, depth);
    (e, ty)
}

/// A term of type `ty` under `ctx`, at most `depth` levels deep.
/// Requires `ty.min_depth() <= depth`.
pub fn random_term(rng: &mut impl Rng, ctx: &[(String, Ty)], ty: &Ty, depth: usize) -> Expr {
    debug_assert!(ty.min_depth() <= depth);
    let vars: Vec<&String> = visible(ctx)
        .into_iter()
        .filter(|(_, t)| *t == ty)
        .map(|(x, _)| x)
        .collect();
    let leaf = |rng: &mut dyn rand::RngCore| -> Option<Expr> {
        if !vars.is_empty() && rng.gen_bool(0.5) {
            return Some(Expr::Var(vars[rng.gen_range(0..vars.len())].clone()));
        }
        match ty {
            Ty::Num => Some(Expr::Num(rng.gen_range(-3..20))),
            Ty::Bool => Some(Expr::Bool(rng.gen_bool(0.5))),
            Ty::Arrow(..) => vars.first().map(|x| Expr::Var((*x).clone())),
        }
    };
    if depth == 0 || (depth <= 2 && rng.gen_bool(0.35)) {
        if let Some(e) = leaf(rng) {
            return e;
        }
    }
    let d = depth - 1;
    loop {
        match rng.gen_range(0..5) {
            0 if *ty == Ty::Num => {
                return Expr::Plus(
                    b(random_term(rng, ctx, &Ty::Num, d)),
                    b(random_term(rng, ctx, &Ty::Num, d)),
                )
            }
            0 => {
                if let Ty::Arrow(a, r) = ty {
                    let x = NAMES[rng.gen_range(0..NAMES.len())].to_string();
                    let mut inner = ctx.to_vec();
                    inner.push((x.clone(), (**a).clone()));
                    return Expr::Fun(x, (**a).clone(), b(random_term(rng, &inner, r, d)));
                }
            }
            1 if ty.min_depth() <= d => {
                return Expr::If(
                    b(random_term(rng, ctx, &Ty::Bool, d)),
                    b(random_term(rng, ctx, ty, d)),
                    b(random_term(rng, ctx, ty, d)),
                )
            }
            2 if ty.min_depth() < d => {
                let arg = random_base(rng);
                let fty = Ty::arrow(arg.clone(), ty.clone());
                return Expr::App(
                    b(random_term(rng, ctx, &fty, d)),
                    b(random_term(rng, ctx, &arg, d)),
                );
            }
            3 if ty.min_depth() <= d => {
                let x = NAMES[rng.gen_range(0..NAMES.len())].to_string();
                let bound_ty = random_type(rng, d.min(1));
                let bound = random_term(rng, ctx, &bound_ty, d);
                let mut inner = ctx.to_vec();
                inner.push((x.clone(), bound_ty));
                return Expr::Let(x, b(bound), b(random_term(rng, &inner, ty, d)));
            }
            4 => {
                if let Some(e) = leaf(rng) {
                    return e;
                }
            }
            _ => {}
        }
    }
}

/// Bindings with shadowed names removed; the rightmost binding wins.
fn visible(ctx: &[(String, Ty)]) -> Vec<(&String, &Ty)> {
    let mut out: Vec<(&String, &Ty)> = Vec::new();
    for (x, t) in ctx.iter().rev() {
        if !out.iter().any(|(y, _)| *y == x) {
            out.push((x, t));
        }
    }
    out
}

// ---- derivation trees ----------------------------------------------------

fn node(judgment: Judgment, rule: &str, children: Vec<DerivNode>) -> DerivNode {
    DerivNode {
        id: NodeId(0),
        judgment,
        rule: RuleRef::Rule(rule.to_string()),
        children,
    }
}

fn ctx_term(ctx: &[(String, Ty)]) -> Term {
    Term::Ctx(ctx.iter().map(|(x, t)| Term::decl(x.as_str(), t.to_term())).collect())
}

/// Syntax-directed type checking; returns the type and its derivation.
pub fn typecheck(ctx: &[(String, Ty)], e: &Expr) -> Option<(Ty, DerivNode)> {
    let (ty, rule, children) = match e {
        Expr::Var(x) => {
            let ty = visible(ctx).into_iter().find(|(y, _)| *y == x)?.1.clone();
            (ty, "T-Var", vec![])
        }
        Expr::Num(_) => (Ty::Num, "T-Num", vec![]),
        Expr::Bool(true) => (Ty::Bool, "T-True", vec![]),
        Expr::Bool(false) => (Ty::Bool, "T-False", vec![]),
        Expr::Plus(l, r) => {
            let (lt, ld) = typecheck(ctx, l)?;
            let (rt, rd) = typecheck(ctx, r)?;
            (lt == Ty::Num && rt == Ty::Num).then_some(())?;
            (Ty::Num, "T-Plus", vec![ld, rd])
        }
        Expr::If(c, t, f) => {
            let (ct, cd) = typecheck(ctx, c)?;
            let (tt, td) = typecheck(ctx, t)?;
            let (ft, fd) = typecheck(ctx, f)?;
            (ct == Ty::Bool && tt == ft).then_some(())?;
            (tt, "T-If", vec![cd, td, fd])
        }
        Expr::Fun(x, a, body) => {
            let mut inner = ctx.to_vec();
            inner.push((x.clone(), a.clone()));
            let (rt, bd) = typecheck(&inner, body)?;
            (Ty::arrow(a.clone(), rt), "T-Lam", vec![bd])
        }
        Expr::App(f, a) => {
            let (ft, fd) = typecheck(ctx, f)?;
            let (at, ad) = typecheck(ctx, a)?;
            let Ty::Arrow(p, r) = ft else { return None };
            (*p == at).then_some(())?;
            (*r, "T-App", vec![fd, ad])
        }
        Expr::Let(x, e1, e2) => {
            let (t1, d1) = typecheck(ctx, e1)?;
            let mut inner = ctx.to_vec();
            inner.push((x.clone(), t1));
            let (t2, d2) = typecheck(&inner, e2)?;
            (t2, "T-Let", vec![d1, d2])
        }
    };
    let j = Judgment::typing(ctx_term(ctx), e.to_term(), ty.to_term());
    Some((ty, node(j, rule, children)))
}

/// `[v/x]e` for a closed value `v` (so no capture can occur).
pub fn subst(e: &Expr, x: &str, v: &Expr) -> Expr {
    match e {
        Expr::Var(y) if y == x => v.clone(),
        Expr::Var(_) | Expr::Num(_) | Expr::Bool(_) => e.clone(),
        Expr::Plus(l, r) => Expr::Plus(b(subst(l, x, v)), b(subst(r, x, v))),
        Expr::App(l, r) => Expr::App(b(subst(l, x, v)), b(subst(r, x, v))),
        Expr::If(c, t, f) => Expr::If(b(subst(c, x, v)), b(subst(t, x, v)), b(subst(f, x, v))),
        Expr::Fun(y, ty, body) if y == x => Expr::Fun(y.clone(), ty.clone(), body.clone()),
        Expr::Fun(y, ty, body) => Expr::Fun(y.clone(), ty.clone(), b(subst(body, x, v))),
        Expr::Let(y, e1, e2) if y == x => Expr::Let(y.clone(), b(subst(e1, x, v)), e2.clone()),
        Expr::Let(y, e1, e2) => Expr::Let(y.clone(), b(subst(e1, x, v)), b(subst(e2, x, v))),
    }
}

/// Big-step evaluation by substitution, recording the derivation.
pub fn eval(e: &Expr) -> Option<(Expr, DerivNode)> {
    let (v, rule, children) = match e {
        Expr::Var(_) => return None,
        Expr::Num(_) => (e.clone(), "E-Num", vec![]),
        Expr::Bool(true) => (e.clone(), "E-True", vec![]),
        Expr::Bool(false) => (e.clone(), "E-False", vec![]),
        Expr::Fun(..) => (e.clone(), "E-Fun", vec![]),
        Expr::Plus(l, r) => {
            let (lv, ld) = eval(l)?;
            let (rv, rd) = eval(r)?;
            let (Expr::Num(a), Expr::Num(c)) = (lv, rv) else { return None };
            (Expr::Num(a.checked_add(c)?), "E-Plus", vec![ld, rd])
        }
        Expr::If(c, t, f) => {
            let (cv, cd) = eval(c)?;
            match cv {
                Expr::Bool(true) => {
                    let (v, td) = eval(t)?;
                    (v, "E-IfTrue", vec![cd, td])
                }
                Expr::Bool(false) => {
                    let (v, fd) = eval(f)?;
                    (v, "E-IfFalse", vec![cd, fd])
                }
                _ => return None,
            }
        }
        Expr::App(f, a) => {
            let (fv, fd) = eval(f)?;
            let (av, ad) = eval(a)?;
            let Expr::Fun(x, _, body) = &fv else { return None };
            let (v, bd) = eval(&subst(body, x, &av))?;
            (v, "E-App", vec![fd, ad, bd])
        }
        Expr::Let(x, e1, e2) => {
            let (v1, d1) = eval(e1)?;
            let (v, d2) = eval(&subst(e2, x, &v1))?;
            (v, "E-Let", vec![d1, d2])
        }
    };
    let j = Judgment::eval(e.to_term(), v.to_term());
    Some((v, node(j, rule, children)))
}

/// Runtime values of the environment-based evaluator.
#[derive(Clone, Debug)]
pub enum EnvValue {
    Num(i64),
    Bool(bool),
    Closure {
        param: String,
        body: Expr,
        env: Rc<Env>,
    },
}

#[derive(Debug, Default)]
pub struct Env {
    bindings: Vec<(String, EnvValue)>,
}

impl Env {
    fn extended(&self, x: &str, v: EnvValue) -> Rc<Env> {
        let mut bindings = self.bindings.clone();
        bindings.push((x.to_string(), v));
        Rc::new(Env { bindings })
    }

    fn get(&self, x: &str) -> Option<&EnvValue> {
        self.bindings.iter().rev().find(|(y, _)| y == x).map(|(_, v)| v)
    }
}

/// Closure-based evaluation, with no substitution at all.
pub fn env_eval(env: &Rc<Env>, e: &Expr) -> Option<EnvValue> {
    Some(match e {
        Expr::Var(x) => env.get(x)?.clone(),
        Expr::Num(n) => EnvValue::Num(*n),
        Expr::Bool(v) => EnvValue::Bool(*v),
        Expr::Plus(l, r) => match (env_eval(env, l)?, env_eval(env, r)?) {
            (EnvValue::Num(a), EnvValue::Num(c)) => EnvValue::Num(a.checked_add(c)?),
            _ => return None,
        },
        Expr::If(c, t, f) => match env_eval(env, c)? {
            EnvValue::Bool(true) => env_eval(env, t)?,
            EnvValue::Bool(false) => env_eval(env, f)?,
            _ => return None,
        },
        Expr::Fun(x, _, body) => EnvValue::Closure {
            param: x.clone(),
            body: (**body).clone(),
            env: env.clone(),
        },
        Expr::App(f, a) => {
            let EnvValue::Closure { param, body, env: cenv } = env_eval(env, f)? else {
                return None;
            };
            let av = env_eval(env, a)?;
            env_eval(&cenv.extended(&param, av), &body)?
        }
        Expr::Let(x, e1, e2) => {
            let v1 = env_eval(env, e1)?;
            env_eval(&env.extended(x, v1), e2)?
        }
    })
}

/// Converts an engine term back into the model AST, if it is an ALFA
/// expression without holes.
pub fn expr_of_term(t: &Term) -> Option<Expr> {
    Some(match t {
        Term::Var(x) => Expr::Var(x.clone()),
        Term::Num(n) => Expr::Num(i64::try_from(n).ok()?),
        Term::Bool(v) => Expr::Bool(*v),
        Term::Plus(l, r) => Expr::Plus(b(expr_of_term(l)?), b(expr_of_term(r)?)),
        Term::If(c, t, e) => Expr::If(b(expr_of_term(c)?), b(expr_of_term(t)?), b(expr_of_term(e)?)),
        Term::Fun(x, ty, body) => Expr::Fun(x.as_var()?.to_string(), ty_of_term(ty)?, b(expr_of_term(body)?)),
        Term::App(f, a) => Expr::App(b(expr_of_term(f)?), b(expr_of_term(a)?)),
        Term::Let(x, e1, e2) => Expr::Let(x.as_var()?.to_string(), b(expr_of_term(e1)?), b(expr_of_term(e2)?)),
        _ => return None,
    })
}

/// Whether a hole-free ALFA judgment holds, decided by the oracles above.
/// `None` when the judgment is not a closed-form typing or evaluation
/// statement.
pub fn judgment_holds(j: &Judgment) -> Option<bool> {
    match j {
        Judgment::Typing { ctx, expr, ty } => {
            let Term::Ctx(entries) = ctx else { return None };
            let ctx = entries
                .iter()
                .map(|d| match d {
                    Term::Decl(x, t) => Some((x.as_var()?.to_string(), ty_of_term(t)?)),
                    _ => None,
                })
                .collect::<Option<Vec<_>>>()?;
            let ty = ty_of_term(ty)?;
            Some(typecheck(&ctx, &expr_of_term(expr)?).is_some_and(|(t, _)| t == ty))
        }
        Judgment::Eval { expr, value } => {
            let value = expr_of_term(value)?;
            Some(eval(&expr_of_term(expr)?).is_some_and(|(v, _)| v == value))
        }
        _ => None,
    }
}

pub fn ty_of_term(t: &Term) -> Option<Ty> {
    Some(match t {
        Term::TNum => Ty::Num,
        Term::TBool => Ty::Bool,
        Term::TArrow(a, r) => Ty::arrow(ty_of_term(a)?, ty_of_term(r)?),
        _ => return None,
    })
}
