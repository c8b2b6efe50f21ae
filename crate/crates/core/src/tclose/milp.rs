use std::collections::{BTreeMap, HashMap};

use num_integer::Integer;
use num_bigint::BigInt;
use num_rational::BigRational;

use crate::enumerate::binomial;
use crate::error::{Error, Result};
use crate::metric::{table_distribution, ClosenessCache, SaSpace};
use crate::rational::Rational;
use crate::solve::{guard, Limits, SolveResult, SolveStats};
use crate::table::{partition_cost, Group, Partition, Table};
use crate::transport::transport_plan;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Integer,
    Continuous,
}

/// A decision variable; every variable is bounded below by zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub name: String,
    /// `(variable index, coefficient)`, coefficients integral.
    pub terms: Vec<(usize, Rational)>,
    pub sense: Sense,
    pub rhs: Rational,
}

/// Mixed integer program with integral coefficients: minimize the
/// objective over nonnegative variables subject to the constraints.
///
/// Models built from a table also remember which table rows and which
/// generalized QI vector each `x` variable stands for; equality ignores
/// that bookkeeping.
#[derive(Debug, Clone)]
pub struct MilpModel {
    variables: Vec<Variable>,
    objective: Vec<(usize, Rational)>,
    constraints: Vec<Constraint>,
    index: HashMap<String, usize>,
    layout: Option<Layout>,
}

impl PartialEq for MilpModel {
    fn eq(&self, other: &Self) -> bool {
        self.variables == other.variables && self.objective == other.objective && self.constraints == other.constraints
    }
}

impl Eq for MilpModel {}

#[derive(Debug, Clone)]
struct Layout {
    /// Star count `C_{v*}` of each generalized vector, in variable order.
    stars: Vec<u64>,
    classes: Vec<Class>,
    /// `g` variable of `(v*, i, j)` is `g_base + (v* * s + i) * s + j`.
    g_base: usize,
    sa_dim: usize,
}

/// Rows sharing a QI vector `v` and SA value `s`: the set `R_{v,s}`.
#[derive(Debug, Clone)]
struct Class {
    rows: Vec<usize>,
    sa: usize,
    /// `(v* position, x variable)` for every generalizer of `v`.
    x: Vec<(usize, usize)>,
}

impl MilpModel {
    /// Assembles a model, checking that names are unique, every term
    /// references a declared variable, coefficients are integral and at
    /// least one constraint exists.
    pub fn new(variables: Vec<Variable>, objective: Vec<(usize, Rational)>, constraints: Vec<Constraint>) -> Result<Self> {
        if constraints.is_empty() {
            return Err(Error::InvalidModel("a model needs at least one constraint".into()));
        }
        let mut index = HashMap::with_capacity(variables.len());
        for (i, v) in variables.iter().enumerate() {
            if index.insert(v.name.clone(), i).is_some() {
                return Err(Error::InvalidModel(format!("variable {} declared twice", v.name)));
            }
        }
        let check_terms = |what: &str, terms: &[(usize, Rational)]| -> Result<()> {
            for (v, c) in terms {
                if *v >= variables.len() {
                    return Err(Error::InvalidModel(format!("{what} references undeclared variable #{v}")));
                }
                if !c.is_integer() {
                    return Err(Error::InvalidModel(format!("{what} has non-integral coefficient {c}")));
                }
            }
            Ok(())
        };
        check_terms("objective", &objective)?;
        let mut names = std::collections::HashSet::new();
        for c in &constraints {
            if !names.insert(c.name.as_str()) {
                return Err(Error::InvalidModel(format!("constraint {} declared twice", c.name)));
            }
            check_terms(&c.name, &c.terms)?;
            if !c.rhs.is_integer() {
                return Err(Error::InvalidModel(format!("{} has non-integral right-hand side", c.name)));
            }
        }
        Ok(MilpModel {
            variables,
            objective,
            constraints,
            index,
            layout: None,
        })
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn objective(&self) -> &[(usize, Rational)] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn num_integer(&self) -> usize {
        self.variables.iter().filter(|v| v.kind == VarKind::Integer).count()
    }

    pub fn num_continuous(&self) -> usize {
        self.variables.len() - self.num_integer()
    }

    pub fn objective_value(&self, values: &[Rational]) -> Rational {
        self.objective.iter().map(|(v, c)| c * &values[*v]).sum()
    }

    /// True iff `values` is a feasible point: nonnegative, integral on
    /// integer variables, and satisfying every constraint.
    pub fn is_satisfied(&self, values: &[Rational]) -> bool {
        if values.len() != self.variables.len() {
            return false;
        }
        let domain_ok = self
            .variables
            .iter()
            .zip(values)
            .all(|(var, x)| !x.is_negative() && (var.kind == VarKind::Continuous || x.is_integer()));
        domain_ok
            && self.constraints.iter().all(|c| {
                let lhs: Rational = c.terms.iter().map(|(v, k)| k * &values[*v]).sum();
                match c.sense {
                    Sense::Le => lhs <= c.rhs,
                    Sense::Eq => lhs == c.rhs,
                    Sense::Ge => lhs >= c.rhs,
                }
            })
    }
}

/// Size bound `2(|Σ|+1)^(2m+1)` on the number of variables, where `Σ` is
/// the set of all values in the table and the SA space.
pub fn variable_bound(table: &Table, space: &SaSpace) -> u128 {
    let sigma = alphabet(table, space) as u128;
    let exp = 2 * table.num_qi() as u32 + 1;
    2u128.saturating_mul((sigma + 1).saturating_pow(exp))
}

fn alphabet(table: &Table, space: &SaSpace) -> usize {
    let mut seen: std::collections::HashSet<&str> = std::collections::HashSet::new();
    for r in table.records() {
        seen.extend(r.qi.iter().map(String::as_str));
    }
    seen.extend(space.labels().iter().map(String::as_str));
    seen.len()
}

const MAX_MODEL_VARIABLES: u128 = 5_000_000;
const STAR: u32 = u32::MAX;

fn token(key: &[u32]) -> String {
    key.iter()
        .map(|&c| if c == STAR { "S".to_string() } else { c.to_string() })
        .collect::<Vec<_>>()
        .join(".")
}

fn lcm_of_denominators<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values.into_iter().fold(BigInt::from(1), |acc, v| acc.lcm(v.denom()))
}

/// Builds the mixed integer program for optimal t-closeness: integer
/// `x(v*,v,s)` routes rows of `R_{v,s}` to the generalized vector `v*`, and
/// continuous `g(v*,i,j)` is the transport plan of group `G_{v*}` scaled by
/// its size. The cost constraint is multiplied through by the common
/// denominator of `t` and the distances so every coefficient is an integer.
///
/// `g` variables are created only for generalized vectors that generalize
/// some row; any other group is empty in every solution.
pub fn build_milp(table: &Table, t: &Rational, space: &SaSpace) -> Result<MilpModel> {
    super::check_threshold(t)?;
    let n = table.len();
    let m = table.num_qi();
    let s = space.len();
    let sa_of = space.row_indices(table)?;

    // global QI alphabet in row-major first appearance
    let mut codes: HashMap<&str, u32> = HashMap::new();
    let mut row_keys = Vec::with_capacity(n);
    for rec in table.records() {
        let key: Vec<u32> = rec
            .qi
            .iter()
            .map(|v| {
                let next = codes.len() as u32;
                *codes.entry(v.as_str()).or_insert(next)
            })
            .collect();
        row_keys.push(key);
    }

    let mut class_rows: BTreeMap<(Vec<u32>, usize), Vec<usize>> = BTreeMap::new();
    for (row, key) in row_keys.into_iter().enumerate() {
        class_rows.entry((key, sa_of[row])).or_default().push(row);
    }

    let generalizers = 1u128.checked_shl(m as u32).unwrap_or(u128::MAX);
    let x_estimate = (class_rows.len() as u128).saturating_mul(generalizers);
    guard("MILP variables", x_estimate, MAX_MODEL_VARIABLES)?;

    let generalize = |key: &[u32], mask: u64| -> Vec<u32> {
        key.iter()
            .enumerate()
            .map(|(c, &v)| if mask >> c & 1 == 1 { STAR } else { v })
            .collect()
    };
    let mut vstar_pos: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
    for (key, _) in class_rows.keys() {
        for mask in 0..(1u64 << m) {
            vstar_pos.insert(generalize(key, mask), 0);
        }
    }
    let g_count = (vstar_pos.len() as u128).saturating_mul((s * s) as u128);
    guard("MILP variables", x_estimate.saturating_add(g_count), MAX_MODEL_VARIABLES)?;
    for (i, pos) in vstar_pos.values_mut().enumerate() {
        *pos = i;
    }
    let vstars: Vec<&Vec<u32>> = vstar_pos.keys().collect();
    let stars: Vec<u64> = vstars.iter().map(|k| k.iter().filter(|&&c| c == STAR).count() as u64).collect();

    let mut variables = Vec::new();
    let mut classes: Vec<Class> = class_rows
        .iter()
        .map(|((_, sa), rows)| Class {
            rows: rows.clone(),
            sa: *sa,
            x: Vec::new(),
        })
        .collect();
    // x variables grouped by v*, then (v, s)
    let mut x_of_vstar: Vec<Vec<(usize, usize)>> = vec![Vec::new(); vstars.len()];
    for (vi, vstar) in vstars.iter().enumerate() {
        for (ci, (key, sa)) in class_rows.keys().enumerate() {
            let covers = vstar.iter().zip(key).all(|(&a, &b)| a == STAR || a == b);
            if covers {
                let var = variables.len();
                variables.push(Variable {
                    name: format!("x_{}_{}_{}", token(vstar), token(key), sa),
                    kind: VarKind::Integer,
                });
                classes[ci].x.push((vi, var));
                x_of_vstar[vi].push((var, *sa));
            }
        }
    }
    let g_base = variables.len();
    for vstar in &vstars {
        for i in 0..s {
            for j in 0..s {
                variables.push(Variable {
                    name: format!("g_{}_{}_{}", token(vstar), i, j),
                    kind: VarKind::Continuous,
                });
            }
        }
    }
    let g = |v: usize, i: usize, j: usize| g_base + (v * s + i) * s + j;

    let one = Rational::one();
    let mut constraints = Vec::new();
    for (((key, sa), rows), class) in class_rows.iter().zip(&classes) {
        constraints.push(Constraint {
            name: format!("r_{}_{}", token(key), sa),
            terms: class.x.iter().map(|&(_, var)| (var, one.clone())).collect(),
            sense: Sense::Eq,
            rhs: Rational::from(rows.len()),
        });
    }

    // SA totals over the whole table: sum_v r_{v,j}
    let mut sa_totals = vec![0usize; s];
    for &j in &sa_of {
        sa_totals[j] += 1;
    }
    let scale = Rational::from(BigRational::from_integer(lcm_of_denominators(
        space.matrix().iter().flatten().chain(std::iter::once(t)),
    )));
    let n_coef = Rational::from(n);
    for (vi, vstar) in vstars.iter().enumerate() {
        let tok = token(vstar);
        let xs = &x_of_vstar[vi];
        for i in 0..s {
            let mut terms: Vec<(usize, Rational)> = (0..s).map(|j| (g(vi, i, j), one.clone())).collect();
            terms.extend(xs.iter().filter(|&&(_, sa)| sa == i).map(|&(var, _)| (var, -one.clone())));
            constraints.push(Constraint {
                name: format!("row_{tok}_{i}"),
                terms,
                sense: Sense::Eq,
                rhs: Rational::zero(),
            });
        }
        for (j, &total) in sa_totals.iter().enumerate().take(s) {
            let mut terms: Vec<(usize, Rational)> = (0..s).map(|i| (g(vi, i, j), n_coef.clone())).collect();
            if total > 0 {
                let coef = -Rational::from(total);
                terms.extend(xs.iter().map(|&(var, _)| (var, coef.clone())));
            }
            constraints.push(Constraint {
                name: format!("col_{tok}_{j}"),
                terms,
                sense: Sense::Eq,
                rhs: Rational::zero(),
            });
        }
        let mut terms = Vec::new();
        for i in 0..s {
            for j in 0..s {
                let d = space.distance(i, j);
                if !d.is_zero() {
                    terms.push((g(vi, i, j), d * &scale));
                }
            }
        }
        if !t.is_zero() {
            let coef = -(t * &scale);
            terms.extend(xs.iter().map(|&(var, _)| (var, coef.clone())));
        }
        // with a single SA value and t = 0 the cost row reads 0 <= 0
        if !terms.is_empty() {
            constraints.push(Constraint {
                name: format!("emd_{tok}"),
                terms,
                sense: Sense::Le,
                rhs: Rational::zero(),
            });
        }
    }

    let mut objective = Vec::with_capacity(g_base);
    for (vi, xs) in x_of_vstar.iter().enumerate() {
        for &(var, _) in xs {
            objective.push((var, Rational::from(stars[vi] as usize)));
        }
    }
    objective.sort_by_key(|(v, _)| *v);

    let mut model = MilpModel::new(variables, objective, constraints)?;
    model.layout = Some(Layout {
        stars,
        classes,
        g_base,
        sa_dim: s,
    });
    Ok(model)
}

/// Solves a model built by [`build_milp`] by enumerating every integer
/// assignment that satisfies the row-count equations. The continuous block
/// of a non-empty group is feasible iff the group is t-close, which is
/// decided exactly by the transportation solver; an optimal transport plan
/// then supplies the `g` values, and the full point is checked against
/// every constraint of the model.
pub fn solve_milp_small(
    model: &MilpModel,
    table: &Table,
    t: &Rational,
    space: &SaSpace,
    limits: &Limits,
) -> Result<SolveResult> {
    let rebuilt;
    let model = match model.layout {
        Some(_) => model,
        None => {
            // a model read back from a file: recover the row bookkeeping
            rebuilt = build_milp(table, t, space)?;
            if rebuilt != *model {
                return Err(Error::InvalidModel("model does not match the table, t and space".into()));
            }
            &rebuilt
        }
    };
    let layout = model.layout.as_ref().expect("layout present");

    let mut assignments: u128 = 1;
    for class in &layout.classes {
        let r = class.rows.len() as u64;
        let k = class.x.len() as u64;
        assignments = assignments.saturating_mul(binomial(r + k - 1, k - 1));
    }
    guard("integer assignments (export the model as LP instead)", assignments, limits.milp_max_assignments)?;

    let mut search = Search {
        layout,
        close: ClosenessCache::new(table, space, t.clone())?,
        counts: vec![vec![0u64; layout.sa_dim]; layout.stars.len()],
        sizes: vec![0u64; layout.stars.len()],
        amounts: layout.classes.iter().map(|c| vec![0u64; c.x.len()]).collect(),
        partial: 0,
        best: None,
        stats: SolveStats::default(),
    };
    search.class(0);
    let (objective, amounts) = search.best.clone().expect("routing every row to the all-star vector is feasible");

    // rows of each class are handed out in index order
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); layout.stars.len()];
    let mut values = vec![Rational::zero(); model.variables.len()];
    for (class, amts) in layout.classes.iter().zip(&amounts) {
        let mut rows = class.rows.iter();
        for (&(vi, var), &a) in class.x.iter().zip(amts) {
            members[vi].extend(rows.by_ref().take(a as usize));
            values[var] = Rational::from(a as usize);
        }
    }
    let target = table_distribution(table, space)?;
    let sa_of = space.row_indices(table)?;
    for (vi, rows) in members.iter().enumerate() {
        if rows.is_empty() {
            continue;
        }
        let size = Rational::from(rows.len());
        let mut supply = vec![Rational::zero(); layout.sa_dim];
        for &r in rows {
            supply[sa_of[r]] += Rational::one();
        }
        let supply: Vec<Rational> = supply.into_iter().map(|c| c / &size).collect();
        let (_, plan) = transport_plan(&supply, target.mass(), space.matrix());
        for (i, row) in plan.iter().enumerate() {
            for (j, f) in row.iter().enumerate() {
                values[layout.g_base + (vi * layout.sa_dim + i) * layout.sa_dim + j] = f * &size;
            }
        }
    }
    assert!(model.is_satisfied(&values), "optimal assignment violates the model");
    assert_eq!(model.objective_value(&values), Rational::from(objective as usize));

    let groups = members
        .into_iter()
        .filter(|rows| !rows.is_empty())
        .map(|rows| Group::new(rows).expect("non-empty"))
        .collect();
    let partition = Partition::new(groups).canonical();
    // at an optimum no group stars a column it agrees on, so the objective
    // is the true suppression cost
    assert_eq!(partition_cost(table, &partition)?, objective);
    Ok(SolveResult::feasible(partition, objective, search.stats))
}

struct Search<'a, 'b> {
    layout: &'a Layout,
    close: ClosenessCache<'b>,
    counts: Vec<Vec<u64>>,
    sizes: Vec<u64>,
    amounts: Vec<Vec<u64>>,
    partial: u64,
    best: Option<(u64, Vec<Vec<u64>>)>,
    stats: SolveStats,
}

impl Search<'_, '_> {
    fn bounded(&self) -> bool {
        self.best.as_ref().is_some_and(|(b, _)| self.partial >= *b)
    }

    fn class(&mut self, c: usize) {
        if self.bounded() {
            return;
        }
        if c == self.layout.classes.len() {
            self.leaf();
            return;
        }
        let r = self.layout.classes[c].rows.len() as u64;
        self.slot(c, 0, r);
    }

    // distribute `left` rows of class `c` over its generalizers from `k` on,
    // largest share to the earliest generalizer first
    fn slot(&mut self, c: usize, k: usize, left: u64) {
        let layout = self.layout;
        let class = &layout.classes[c];
        let last = k + 1 == class.x.len();
        let range: Vec<u64> = if last { vec![left] } else { (0..=left).rev().collect() };
        let vi = class.x[k].0;
        for a in range {
            self.amounts[c][k] = a;
            self.counts[vi][class.sa] += a;
            self.sizes[vi] += a;
            self.partial += a * layout.stars[vi];
            if last {
                self.class(c + 1);
            } else {
                self.slot(c, k + 1, left - a);
            }
            self.counts[vi][class.sa] -= a;
            self.sizes[vi] -= a;
            self.partial -= a * layout.stars[vi];
        }
        self.amounts[c][k] = 0;
    }

    fn leaf(&mut self) {
        self.stats.nodes += 1;
        for vi in 0..self.sizes.len() {
            if self.sizes[vi] > 0 {
                self.stats.subsets += 1;
                if !self.close.is_close_counts(&self.counts[vi]) {
                    return;
                }
            }
        }
        self.best = Some((self.partial, self.amounts.clone()));
    }
}
