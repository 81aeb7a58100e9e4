//! Black-boxing and compositional solving of open matrices.
//!
//! `blackbox(star_open(M))` is the boundary-to-boundary solution of an open
//! network. For functional pieces glued without zig-zags the solution of a
//! composite is the matrix product of the pieces' solutions, so
//! [`solve_compositional`] never has to build the glued matrix there.

use std::collections::{HashMap, HashSet};

use crate::cospan::{coproduct, copair, pushout, OpenMatrix};
use crate::error::{Error, Result};
use crate::matrix::{ClosureAlgorithm, FiniteFunction, RMatrix};
use crate::par::{self, Execution};
use crate::quantale::Quantale;

/// Boundary behavior: entry `(x, y)` is `M(leg_in(x), leg_out(y))`.
pub fn blackbox<Q: Quantale>(m: &OpenMatrix<Q>) -> RMatrix<Q> {
    m.matrix()
        .restrict(m.leg_in(), m.leg_out())
        .expect("legs land in the carrier")
}

/// Replaces the apex by its closure.
pub fn star_open<Q: Quantale>(m: &OpenMatrix<Q>, algo: ClosureAlgorithm) -> Result<OpenMatrix<Q>> {
    m.with_matrix(m.matrix().closure(algo)?)
}

/// `blackbox(star_open(m))`.
pub fn solve_open<Q: Quantale>(m: &OpenMatrix<Q>, algo: ClosureAlgorithm) -> Result<RMatrix<Q>> {
    Ok(blackbox(&star_open(m, algo)?))
}

/// Every input image has a bottom column (a source) and every output image
/// has a bottom row (a sink).
pub fn is_functional<Q: Quantale>(m: &OpenMatrix<Q>) -> bool {
    let mat = m.matrix();
    let n = mat.rows().len();
    let sources = m
        .leg_in()
        .as_slice()
        .iter()
        .all(|&v| (0..n).all(|u| mat.is_bottom_at(u, v)));
    let sinks = m
        .leg_out()
        .as_slice()
        .iter()
        .all(|&v| (0..n).all(|w| mat.is_bottom_at(v, w)));
    sources && sinks
}

/// Whether gluing along `out: Y -> V` and `inp: Y -> W` identifies only
/// directly linked vertices: inside every pushout class, each `V`-vertex is
/// paired with each `W`-vertex by some `y`.
///
/// When this fails (a zig-zag `v1 ~ w1 ~ v2 ~ w2` without a `y` linking
/// `v1` to `w2`) the glued network has routes that no single boundary point
/// carries, and the product of black-boxes undercounts them.
pub fn gluing_is_direct(out: &FiniteFunction, inp: &FiniteFunction) -> bool {
    let Ok(po) = pushout(out, inp) else {
        return false;
    };
    let linked: HashSet<(usize, usize)> = out
        .as_slice()
        .iter()
        .copied()
        .zip(inp.as_slice().iter().copied())
        .collect();
    let mut left: HashMap<usize, HashSet<usize>> = HashMap::new();
    let mut right: HashMap<usize, HashSet<usize>> = HashMap::new();
    for &(v, w) in &linked {
        left.entry(po.left_leg.apply(v)).or_default().insert(v);
        right.entry(po.right_leg.apply(w)).or_default().insert(w);
    }
    left.iter().all(|(class, vs)| {
        let ws = &right[class];
        vs.iter().all(|v| ws.iter().all(|w| linked.contains(&(*v, *w))))
    })
}

/// Both sides of the lax comparison: the product of the pieces' solutions
/// and the solution of the composite.
pub fn lax_sides<Q: Quantale>(
    m: &OpenMatrix<Q>,
    n: &OpenMatrix<Q>,
    algo: ClosureAlgorithm,
) -> Result<(RMatrix<Q>, RMatrix<Q>)> {
    let product = solve_open(m, algo)?.mul(&solve_open(n, algo)?)?;
    let composite = solve_open(&m.compose(n)?, algo)?;
    Ok((product, composite))
}

/// Checks `blackbox(star M) * blackbox(star N) <= blackbox(star (M ; N))`.
pub fn check_lax<Q: Quantale>(m: &OpenMatrix<Q>, n: &OpenMatrix<Q>, algo: ClosureAlgorithm) -> Result<bool> {
    let (product, composite) = lax_sides(m, n, algo)?;
    product.leq(&composite)
}

/// The two sides of the binomial expansion for the `n`-th power of a glued
/// functional pair: the black-box of `(a_*M + b_*N)^n`, and the join over
/// `i + j = n` of `blackbox((a_*M)^i) * blackbox((b_*N)^j)`, all taken on the
/// glued carrier.
pub fn binomial_sides<Q: Quantale>(
    m: &OpenMatrix<Q>,
    n: &OpenMatrix<Q>,
    power: usize,
) -> Result<(RMatrix<Q>, RMatrix<Q>)> {
    for (side, piece) in [("left", m), ("right", n)] {
        if !is_functional(piece) {
            return Err(Error::NotFunctional(format!("{side} open matrix")));
        }
    }
    let po = m.gluing(n)?;
    let a = m.matrix().pushforward(&po.left_leg)?;
    let b = n.matrix().pushforward(&po.right_leg)?;
    let x = po.left_leg.after(m.leg_in())?;
    let y = po.left_leg.after(m.leg_out())?;
    let y2 = po.right_leg.after(n.leg_in())?;
    let z = po.right_leg.after(n.leg_out())?;

    let glued = a.join(&b)?;
    let left = glued.pow(power)?.restrict(&x, &z)?;

    let a_pows = powers(&a, power)?;
    let b_pows = powers(&b, power)?;
    let q = m.quantale().clone();
    let mut right = RMatrix::zero(q, m.inputs().clone(), n.outputs().clone());
    for i in 0..=power {
        let term = a_pows[i]
            .restrict(&x, &y)?
            .mul(&b_pows[power - i].restrict(&y2, &z)?)?;
        right = right.join(&term)?;
    }
    Ok((left, right))
}

fn powers<Q: Quantale>(m: &RMatrix<Q>, n: usize) -> Result<Vec<RMatrix<Q>>> {
    let mut out = vec![RMatrix::identity(m.quantale().clone(), m.rows().clone())];
    for k in 0..n {
        out.push(out[k].mul(m)?);
    }
    Ok(out)
}

/// A tree of open matrices combined by composition and tensor.
#[derive(Debug, Clone, PartialEq)]
pub enum CompositionExpr<Q: Quantale> {
    Leaf(OpenMatrix<Q>),
    Compose(Box<CompositionExpr<Q>>, Box<CompositionExpr<Q>>),
    Tensor(Box<CompositionExpr<Q>>, Box<CompositionExpr<Q>>),
}

impl<Q: Quantale> CompositionExpr<Q> {
    pub fn leaf(m: OpenMatrix<Q>) -> Self {
        CompositionExpr::Leaf(m)
    }

    pub fn compose(self, next: Self) -> Self {
        CompositionExpr::Compose(Box::new(self), Box::new(next))
    }

    pub fn tensor(self, other: Self) -> Self {
        CompositionExpr::Tensor(Box::new(self), Box::new(other))
    }

    /// Builds the fully glued open matrix.
    pub fn glue(&self) -> Result<OpenMatrix<Q>> {
        match self {
            CompositionExpr::Leaf(m) => Ok(m.clone()),
            CompositionExpr::Compose(l, r) => l.glue()?.compose(&r.glue()?),
            CompositionExpr::Tensor(l, r) => l.glue()?.tensor(&r.glue()?),
        }
    }

    pub fn leaves(&self) -> usize {
        match self {
            CompositionExpr::Leaf(_) => 1,
            CompositionExpr::Compose(l, r) | CompositionExpr::Tensor(l, r) => l.leaves() + r.leaves(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveMode {
    /// Products where both pieces are functional and directly glued, gluing elsewhere.
    #[default]
    Auto,
    /// Always glue the whole expression, then close.
    Glued,
    /// Products only; fails on a compose node that does not qualify.
    Compositional,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport<Q: Quantale> {
    pub result: RMatrix<Q>,
    /// Compose nodes answered by a product of sub-solutions.
    pub fast_nodes: usize,
    /// Compose nodes answered by gluing and closing.
    pub fallback_nodes: usize,
}

/// Solution of a subtree together with the shape of its glued cospan.
struct Partial<Q: Quantale> {
    solution: RMatrix<Q>,
    leg_in: FiniteFunction,
    leg_out: FiniteFunction,
    functional: bool,
    fast: usize,
    fallback: usize,
}

/// The black-boxed solution of the glued network described by `expr`.
pub fn solve_compositional<Q: Quantale>(
    expr: &CompositionExpr<Q>,
    algo: ClosureAlgorithm,
    mode: SolveMode,
) -> Result<SolveReport<Q>> {
    solve_compositional_with(expr, algo, mode, Execution::default())
}

pub fn solve_compositional_with<Q: Quantale>(
    expr: &CompositionExpr<Q>,
    algo: ClosureAlgorithm,
    mode: SolveMode,
    exec: Execution,
) -> Result<SolveReport<Q>> {
    if mode == SolveMode::Glued {
        let glued = expr.glue()?;
        let fallback = usize::from(!matches!(expr, CompositionExpr::Leaf(_)));
        return Ok(SolveReport {
            result: solve_open(&glued, algo)?,
            fast_nodes: 0,
            fallback_nodes: fallback,
        });
    }
    let p = solve_node(expr, algo, mode, exec)?;
    Ok(SolveReport {
        result: p.solution,
        fast_nodes: p.fast,
        fallback_nodes: p.fallback,
    })
}

fn solve_node<Q: Quantale>(
    expr: &CompositionExpr<Q>,
    algo: ClosureAlgorithm,
    mode: SolveMode,
    exec: Execution,
) -> Result<Partial<Q>> {
    let (l, r) = match expr {
        CompositionExpr::Leaf(m) => {
            return Ok(Partial {
                solution: solve_open(m, algo)?,
                leg_in: m.leg_in().clone(),
                leg_out: m.leg_out().clone(),
                functional: is_functional(m),
                fast: 0,
                fallback: 0,
            });
        }
        CompositionExpr::Compose(l, r) | CompositionExpr::Tensor(l, r) => (l, r),
    };
    let (lp, rp) = par::join(
        exec,
        || solve_node(l, algo, mode, exec),
        || solve_node(r, algo, mode, exec),
    );
    let (lp, rp) = (lp?, rp?);
    let (fast, fallback) = (lp.fast + rp.fast, lp.fallback + rp.fallback);

    if let CompositionExpr::Tensor(..) = expr {
        let carrier = coproduct(lp.leg_in.codomain(), rp.leg_in.codomain())?;
        let ins = coproduct(lp.leg_in.domain(), rp.leg_in.domain())?;
        let outs = coproduct(lp.leg_out.domain(), rp.leg_out.domain())?;
        let leg_in = copair(
            &ins,
            &carrier.left_leg.after(&lp.leg_in)?,
            &carrier.right_leg.after(&rp.leg_in)?,
        )?;
        let leg_out = copair(
            &outs,
            &carrier.left_leg.after(&lp.leg_out)?,
            &carrier.right_leg.after(&rp.leg_out)?,
        )?;
        return Ok(Partial {
            solution: lp.solution.direct_sum(&rp.solution, ins.quotient, outs.quotient)?,
            leg_in,
            leg_out,
            functional: lp.functional && rp.functional,
            fast,
            fallback,
        });
    }

    if lp.leg_out.domain() != rp.leg_in.domain() {
        return Err(Error::BoundaryMismatch {
            left: lp.leg_out.domain().to_vec(),
            right: rp.leg_in.domain().to_vec(),
        });
    }
    let qualifies = lp.functional && rp.functional && gluing_is_direct(&lp.leg_out, &rp.leg_in);
    if qualifies {
        let po = pushout(&lp.leg_out, &rp.leg_in)?;
        return Ok(Partial {
            solution: lp.solution.mul_with(&rp.solution, exec)?,
            leg_in: po.left_leg.after(&lp.leg_in)?,
            leg_out: po.right_leg.after(&rp.leg_out)?,
            functional: true,
            fast: fast + 1,
            fallback,
        });
    }
    if mode == SolveMode::Compositional {
        let why = if lp.functional && rp.functional {
            "gluing identifies vertices not linked by a common boundary point"
        } else {
            "a compose node joins a non-functional open matrix"
        };
        return Err(Error::NotFunctional(why.into()));
    }
    let glued = expr.glue()?;
    log::debug!(
        "gluing a subtree with {} leaves into {} vertices",
        expr.leaves(),
        glued.carrier().len()
    );
    Ok(Partial {
        solution: solve_open(&glued, algo)?,
        leg_in: glued.leg_in().clone(),
        leg_out: glued.leg_out().clone(),
        functional: is_functional(&glued),
        fast: 0,
        fallback: 1,
    })
}
