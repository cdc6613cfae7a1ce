//! Shared generators and a brute-force reference enumerator for the
//! integration and acceptance tests.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sketchql_core::algebra::{emit_sql, AggFunc, Attr, BaseType, CmpOp, Expr, Field, Predicate, SpecItem};
use sketchql_core::similarity::SimilarityProvider;
use sketchql_core::sketch::{Hint, Operand, SketchSpec};
use sketchql_core::{Catalog, QueryTerm, RecordType, SketchRel, Value};

/// Property-test settings: a fixed seed so every run checks the same cases.
pub fn cases(n: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config {
        cases: n,
        failure_persistence: None,
        rng_seed: proptest::test_runner::RngSeed::Fixed(20170401),
        ..Default::default()
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy)]
enum Pool {
    Id,
    Range(i64, i64),
    Words(&'static [&'static str]),
    Bool,
}

struct Template {
    name: &'static str,
    columns: &'static [(&'static str, Pool)],
    /// `(column, referenced table, referenced column)`.
    fks: &'static [(&'static str, &'static str, &'static str)],
}

const CITIES: &[&str] = &["austin", "boston", "Denver", "paris", "rome", "Austin"];
const PEOPLE: &[&str] = &["ann", "bob", "carla", "dev", "Ellen", "frank"];
const TOPICS: &[&str] = &["algebra", "biology", "chemistry", "drama", "Economics", "film"];
const VENUES: &[&str] = &["vldb", "sigmod", "icde", "KDD", "pods"];
const HEADLINES: &[&str] = &["joins", "streams", "graphs", "indexes", "Sketches"];
const DIVISIONS: &[&str] = &["north", "south", "east", "west", "Central"];
const ROOMS: &[&str] = &["r101", "r102", "lab", "hall", "annex"];

const TEMPLATES: &[Template] = &[
    Template {
        name: "Department",
        columns: &[
            ("did", Pool::Id),
            ("division", Pool::Words(DIVISIONS)),
            ("budget", Pool::Range(1, 12)),
            ("building", Pool::Words(ROOMS)),
        ],
        fks: &[],
    },
    Template {
        name: "Student",
        columns: &[
            ("sid", Pool::Id),
            ("fullname", Pool::Words(PEOPLE)),
            ("age", Pool::Range(18, 26)),
            ("gpa", Pool::Range(1, 4)),
            ("did", Pool::Range(1, 8)),
            ("active", Pool::Bool),
        ],
        fks: &[("did", "Department", "did")],
    },
    Template {
        name: "Course",
        columns: &[
            ("cid", Pool::Id),
            ("title", Pool::Words(TOPICS)),
            ("credits", Pool::Range(1, 6)),
            ("did", Pool::Range(1, 8)),
            ("room", Pool::Words(ROOMS)),
        ],
        fks: &[("did", "Department", "did")],
    },
    Template {
        name: "Teacher",
        columns: &[
            ("tid", Pool::Id),
            ("teacher", Pool::Words(PEOPLE)),
            ("salary", Pool::Range(3, 12)),
            ("did", Pool::Range(1, 8)),
            ("tenured", Pool::Bool),
        ],
        fks: &[("did", "Department", "did")],
    },
    Template {
        name: "Venue",
        columns: &[
            ("vid", Pool::Id),
            ("venue", Pool::Words(VENUES)),
            ("city", Pool::Words(CITIES)),
            ("founded", Pool::Range(1970, 1980)),
        ],
        fks: &[],
    },
    Template {
        name: "Paper",
        columns: &[
            ("pid", Pool::Id),
            ("headline", Pool::Words(HEADLINES)),
            ("year", Pool::Range(2008, 2012)),
            ("vid", Pool::Range(1, 6)),
            ("pages", Pool::Range(4, 14)),
        ],
        fks: &[("vid", "Venue", "vid")],
    },
    Template {
        name: "Enroll",
        columns: &[
            ("sid", Pool::Range(1, 10)),
            ("cid", Pool::Range(1, 10)),
            ("grade", Pool::Range(1, 5)),
        ],
        fks: &[("sid", "Student", "sid"), ("cid", "Course", "cid")],
    },
];

/// Table names the generators can produce.
pub fn template_names() -> Vec<&'static str> {
    TEMPLATES.iter().map(|t| t.name).collect()
}

fn pool_type(pool: Pool) -> BaseType {
    match pool {
        Pool::Id | Pool::Range(..) => BaseType::Number,
        Pool::Words(_) => BaseType::String,
        Pool::Bool => BaseType::Bool,
    }
}

fn draw(rng: &mut ChaCha8Rng, pool: Pool, row: usize) -> Value {
    match pool {
        Pool::Id => Value::number((row + 1) as f64),
        Pool::Range(lo, hi) => Value::number(rng.gen_range(lo..=hi) as f64),
        Pool::Words(words) => Value::string(*words.choose(rng).unwrap()),
        Pool::Bool => Value::Bool(rng.gen_bool(0.5)),
    }
}

/// A catalog with the named tables. With `all_columns` every template
/// column is kept, otherwise the key and a random subset of the rest.
pub fn catalog_of(rng: &mut ChaCha8Rng, names: &[&str], all_columns: bool, rows: (usize, usize)) -> Catalog {
    let mut b = Catalog::builder();
    let mut kept: Vec<(&str, Vec<&str>)> = Vec::new();
    for name in names {
        let t = TEMPLATES.iter().find(|t| t.name == *name).expect("known template");
        let mut columns: Vec<(&str, Pool)> = vec![t.columns[0]];
        for c in &t.columns[1..] {
            if all_columns || rng.gen_bool(0.7) {
                columns.push(*c);
            }
        }
        let n = rng.gen_range(rows.0..=rows.1);
        let data: Vec<Vec<Option<Value>>> = (0..n)
            .map(|r| columns.iter().map(|(_, p)| Some(draw(rng, *p, r))).collect())
            .collect();
        let schema: Vec<(String, BaseType)> = columns.iter().map(|(c, p)| (c.to_string(), pool_type(*p))).collect();
        let key: Vec<String> = match columns[0].1 {
            Pool::Id => vec![columns[0].0.to_string()],
            _ => vec![],
        };
        b.add_table(name, &schema, &key, data).unwrap();
        kept.push((name, columns.iter().map(|(c, _)| *c).collect()));
    }
    for name in names {
        let t = TEMPLATES.iter().find(|t| t.name == *name).unwrap();
        for (col, rt, rc) in t.fks {
            let has = |table: &str, column: &str| kept.iter().any(|(n, cs)| *n == table && cs.contains(&column));
            if has(name, col) && has(rt, rc) {
                b.add_foreign_key(name, col, rt, rc);
            }
        }
    }
    b.build().unwrap()
}

/// A copy of `catalog` with the tables of `extra` appended.
pub fn with_tables(catalog: &Catalog, extra: &Catalog) -> Catalog {
    let mut b = Catalog::builder();
    for t in catalog.tables().iter().chain(extra.tables()) {
        let schema: Vec<(String, BaseType)> = t
            .record_type()
            .fields()
            .iter()
            .map(|f| (f.attr.base().1.to_string(), f.ty))
            .collect();
        let rows = t.rows().iter().map(|r| r.iter().cloned().map(Some).collect()).collect();
        b.add_table(t.name(), &schema, t.primary_key(), rows).unwrap();
    }
    for fk in catalog.foreign_keys().iter().chain(extra.foreign_keys()) {
        let (t, c) = fk.from.base();
        let (rt, rc) = fk.to.base();
        b.add_foreign_key(t, c, rt, rc);
    }
    b.build().unwrap()
}

/// One to four random tables with up to 50 rows each.
pub fn random_catalog(rng: &mut ChaCha8Rng) -> Catalog {
    let mut names = template_names();
    names.shuffle(rng);
    let k = rng.gen_range(1..=4);
    names.truncate(k);
    catalog_of(rng, &names, false, (0, 50))
}

const STRAY: &[&str] = &["banana", "colour", "total", "number", "names", "count", "when", "place"];

fn base_columns(catalog: &Catalog) -> Vec<(String, String, BaseType)> {
    catalog
        .tables()
        .iter()
        .flat_map(|t| {
            t.record_type().fields().iter().map(move |f| {
                let (table, column) = f.attr.base();
                (table.to_string(), column.to_string(), f.ty)
            })
        })
        .collect()
}

/// A hint drawn from table and column names, their variants, stray words,
/// or no hint at all.
pub fn random_hint(rng: &mut ChaCha8Rng, catalog: &Catalog) -> Hint {
    let cols = base_columns(catalog);
    match rng.gen_range(0..10) {
        0..=2 => Hint::none(),
        3..=5 if !cols.is_empty() => Hint::new(&cols.choose(rng).unwrap().1),
        6 if !cols.is_empty() => {
            let (t, c, _) = cols.choose(rng).unwrap();
            Hint::new(&format!("{} {}", t.to_lowercase(), c))
        }
        7 if !cols.is_empty() && rng.gen_bool(0.3) => {
            let (_, c, _) = cols.choose(rng).unwrap();
            Hint::new(&format!("number of {}", c))
        }
        7 => {
            let t = catalog
                .tables()
                .choose(rng)
                .map(|t| t.name().to_string())
                .unwrap_or_default();
            Hint::new(&format!("{}s", t.to_lowercase()))
        }
        _ => Hint::new(STRAY.choose(rng).unwrap()),
    }
}

fn random_value(rng: &mut ChaCha8Rng, catalog: &Catalog) -> Value {
    let cols = base_columns(catalog);
    if rng.gen_bool(0.1) {
        // Two stored words in one literal, as a parser reads "austin boston".
        let pool = [CITIES, PEOPLE, TOPICS, VENUES, DIVISIONS].choose(rng).unwrap();
        return Value::string(format!("{} {}", pool.choose(rng).unwrap(), pool.choose(rng).unwrap()));
    }
    if rng.gen_bool(0.7) {
        if let Some((table, column, _)) = cols.choose(rng) {
            let data = catalog.table(table).unwrap();
            let idx = data.column_names().position(|c| c == column).unwrap();
            if let Some(row) = data.rows().choose(rng) {
                return match &row[idx] {
                    // Numbers sometimes arrive as text, as a parser would give them.
                    Value::Number(n) if rng.gen_bool(0.3) => Value::string(format!("{}", n)),
                    v => v.clone(),
                };
            }
        }
    }
    match rng.gen_range(0..3) {
        0 => Value::number(rng.gen_range(0..40) as f64),
        1 => Value::string(*STRAY.choose(rng).unwrap()),
        _ => Value::Bool(rng.gen_bool(0.5)),
    }
}

fn random_func(rng: &mut ChaCha8Rng) -> AggFunc {
    *AggFunc::ALL.choose(rng).unwrap()
}

fn random_op(rng: &mut ChaCha8Rng) -> CmpOp {
    if rng.gen_bool(0.5) {
        CmpOp::Eq
    } else {
        *CmpOp::ALL.choose(rng).unwrap()
    }
}

fn random_atom(rng: &mut ChaCha8Rng, catalog: &Catalog, rich: bool) -> SketchSpec {
    let lhs = random_hint(rng, catalog);
    let op = random_op(rng);
    let operand = match rng.gen_range(0..10) {
        0..=1 if rich => Operand::Col(random_hint(rng, catalog)),
        2 if rich => Operand::Rel(Box::new(SketchRel::project(
            SketchSpec::Agg(random_func(rng), random_hint(rng, catalog)),
            SketchRel::table(random_hint(rng, catalog)),
        ))),
        _ => Operand::Value(random_value(rng, catalog)),
    };
    SketchSpec::Atom(lhs, op, operand)
}

fn random_predicate(rng: &mut ChaCha8Rng, catalog: &Catalog, rich: bool) -> SketchSpec {
    if !rich {
        return random_atom(rng, catalog, false);
    }
    match rng.gen_range(0..10) {
        0 => SketchSpec::and(random_atom(rng, catalog, false), random_atom(rng, catalog, false)),
        1 => SketchSpec::or(random_atom(rng, catalog, false), random_atom(rng, catalog, false)),
        2 => SketchSpec::not(random_atom(rng, catalog, false)),
        _ => random_atom(rng, catalog, true),
    }
}

fn random_items(rng: &mut ChaCha8Rng, catalog: &Catalog) -> SketchSpec {
    match rng.gen_range(0..10) {
        0..=3 => SketchSpec::Col(random_hint(rng, catalog)),
        4..=5 => {
            let f = *AggFunc::ALL.choose(rng).unwrap();
            SketchSpec::Agg(f, random_hint(rng, catalog))
        }
        6 => {
            let f = *AggFunc::ALL.choose(rng).unwrap();
            SketchSpec::Group(f, random_hint(rng, catalog), random_hint(rng, catalog))
        }
        7..=8 => SketchSpec::list(
            SketchSpec::Col(random_hint(rng, catalog)),
            SketchSpec::Col(random_hint(rng, catalog)),
        ),
        _ => SketchSpec::list(
            SketchSpec::Agg(random_func(rng), random_hint(rng, catalog)),
            SketchSpec::Agg(random_func(rng), random_hint(rng, catalog)),
        ),
    }
}

/// A random sketch sized so that exhaustive enumeration stays cheap: at
/// most one join, whose selection is a single literal comparison.
pub fn random_sketch(rng: &mut ChaCha8Rng, catalog: &Catalog) -> SketchRel {
    let joined = rng.gen_bool(0.25);
    let base = if joined {
        SketchRel::join(
            SketchRel::table(random_hint(rng, catalog)),
            random_hint(rng, catalog),
            random_hint(rng, catalog),
            SketchRel::table(random_hint(rng, catalog)),
        )
    } else {
        SketchRel::table(random_hint(rng, catalog))
    };
    let filtered = if rng.gen_bool(0.6) {
        SketchRel::select(random_predicate(rng, catalog, !joined), base)
    } else {
        base
    };
    if rng.gen_bool(0.8) {
        SketchRel::project(random_items(rng, catalog), filtered)
    } else {
        filtered
    }
}

/// Reference enumerator for the default configuration: every completion is
/// built explicitly, with no pruning, memoization or per-hole caps, and
/// content scores are computed by scanning the stored rows.
pub struct BruteForce<'a> {
    pub catalog: &'a Catalog,
    pub sim: &'a SimilarityProvider,
}

pub const PRED_EPSILON: f64 = 1e-3;
pub const JOIN_EPSILON: f64 = 0.1;
pub const TABLE_WEIGHT: f64 = 0.9;
pub const NEUTRAL: f64 = 0.5;

type Factors = Vec<f64>;

fn cat(a: &[f64], b: &[f64]) -> Factors {
    a.iter().chain(b).copied().collect()
}

/// Geometric mean, or the neutral score for an empty list.
pub fn geometric_mean(factors: &[f64]) -> f64 {
    if factors.is_empty() {
        return NEUTRAL;
    }
    let product: f64 = factors.iter().product();
    product.powf(1.0 / factors.len() as f64)
}

impl BruteForce<'_> {
    /// Every completion with no zero factor, as `(sql, score)` ranked by
    /// score, then SQL length, then SQL text.
    pub fn ranked(&self, rel: &SketchRel) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> = self
            .relations(rel)
            .into_iter()
            .filter(|(_, _, f)| f.iter().all(|x| *x > 0.0))
            .map(|(q, _, f)| (emit_sql(&q), geometric_mean(&f)))
            .collect();
        out.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then(a.0.len().cmp(&b.0.len()))
                .then_with(|| a.0.cmp(&b.0))
        });
        out
    }

    pub fn relations(&self, rel: &SketchRel) -> Vec<(QueryTerm, RecordType, Factors)> {
        match rel {
            SketchRel::Table(h) => self
                .catalog
                .tables()
                .iter()
                .map(|t| {
                    let f = match h.text() {
                        Some(_) => vec![self.sim.sim(h, t.name())],
                        None => vec![],
                    };
                    (QueryTerm::table(t.name()), t.record_type().clone(), f)
                })
                .collect(),
            SketchRel::Project(spec, input) => {
                let mut out = Vec::new();
                for (q, tau, f) in self.relations(input) {
                    for (items, ty, g) in self.items(spec, &tau) {
                        out.push((QueryTerm::project(items, q.clone()), ty, cat(&f, &g)));
                    }
                }
                out
            }
            SketchRel::Select(spec, input) => {
                let mut out = Vec::new();
                for (q, tau, f) in self.relations(input) {
                    for (p, g) in self.predicates(spec, &tau) {
                        out.push((QueryTerm::select(p, q.clone()), tau.clone(), cat(&f, &g)));
                    }
                }
                out
            }
            SketchRel::Join {
                left,
                left_col,
                right_col,
                right,
            } => {
                let mut out = Vec::new();
                let rights = self.relations(right);
                for (lq, lt, lf) in self.relations(left) {
                    for (rq, rt, rf) in &rights {
                        let Some(ty) = lt.union(rt) else {
                            continue;
                        };
                        for (a, aty, af) in self.columns(left_col, &lt) {
                            for (b, bty, bf) in self.columns(right_col, rt) {
                                if aty != bty {
                                    continue;
                                }
                                let fk = self
                                    .catalog
                                    .foreign_keys()
                                    .iter()
                                    .any(|k| (k.from == a && k.to == b) || (k.from == b && k.to == a));
                                let pj = if fk { 1.0 - JOIN_EPSILON } else { JOIN_EPSILON };
                                let mut f = cat(&lf, rf);
                                f.extend(af.iter().chain(&bf));
                                f.push(pj);
                                out.push((QueryTerm::join(lq.clone(), a.clone(), b, rq.clone()), ty.clone(), f));
                            }
                        }
                    }
                }
                out
            }
        }
    }

    fn columns(&self, hint: &Hint, tau: &RecordType) -> Vec<(Attr, BaseType, Factors)> {
        tau.fields()
            .iter()
            .map(|field| {
                let f = if hint.is_empty() {
                    vec![]
                } else {
                    let (table, column) = match &field.attr {
                        Attr::Column { table, column } => (table.clone(), column.clone()),
                        Attr::Aggregate { func, of } => (of.base().0.to_string(), format!("{} {}", func, of.base().1)),
                    };
                    let direct = self.sim.sim(hint, &column);
                    vec![direct.max(TABLE_WEIGHT * self.sim.sim(hint, &table))]
                };
                (field.attr.clone(), field.ty, f)
            })
            .collect()
    }

    fn items(&self, spec: &SketchSpec, tau: &RecordType) -> Vec<(Vec<SpecItem>, RecordType, Factors)> {
        match spec {
            SketchSpec::Col(h) => self
                .columns(h, tau)
                .into_iter()
                .map(|(a, ty, f)| (vec![SpecItem::Column(a.clone())], RecordType::single(a, ty), f))
                .collect(),
            SketchSpec::Agg(func, h) => self
                .columns(h, tau)
                .into_iter()
                .filter_map(|(a, ty, f)| {
                    let out = agg_type(*func, ty)?;
                    Some((
                        vec![SpecItem::Aggregate(*func, a.clone())],
                        RecordType::single(Attr::aggregate(*func, a), out),
                        f,
                    ))
                })
                .collect(),
            SketchSpec::Group(func, target, key) => {
                let mut out = Vec::new();
                for (t, tty, tf) in self.columns(target, tau) {
                    let Some(out_ty) = agg_type(*func, tty) else {
                        continue;
                    };
                    for (k, kty, kf) in self.columns(key, tau) {
                        let ty = RecordType::new(vec![
                            Field {
                                attr: k.clone(),
                                ty: kty,
                            },
                            Field {
                                attr: Attr::aggregate(*func, t.clone()),
                                ty: out_ty,
                            },
                        ])
                        .unwrap();
                        let item = SpecItem::Group {
                            func: *func,
                            target: t.clone(),
                            key: k,
                        };
                        out.push((vec![item], ty, cat(&tf, &kf)));
                    }
                }
                out
            }
            SketchSpec::List(a, b) => {
                let mut out = Vec::new();
                let seconds = self.items(b, tau);
                for (xs, xt, xf) in self.items(a, tau) {
                    for (ys, yt, yf) in &seconds {
                        let Some(ty) = xt.union(yt) else {
                            continue;
                        };
                        let items: Vec<SpecItem> = xs.iter().chain(ys).cloned().collect();
                        let groups = items.iter().filter(|i| matches!(i, SpecItem::Group { .. })).count();
                        let plain = items.iter().filter(|i| matches!(i, SpecItem::Column(_))).count();
                        if (groups > 0 && items.len() > 1) || (plain > 0 && plain < items.len()) {
                            continue;
                        }
                        out.push((items, ty, cat(&xf, yf)));
                    }
                }
                out
            }
            _ => vec![],
        }
    }

    fn predicates(&self, spec: &SketchSpec, tau: &RecordType) -> Vec<(Predicate, Factors)> {
        match spec {
            SketchSpec::And(a, b) | SketchSpec::Or(a, b) => {
                let seconds = self.predicates(b, tau);
                let mut out = Vec::new();
                for (p, pf) in self.predicates(a, tau) {
                    for (q, qf) in &seconds {
                        let pred = if matches!(spec, SketchSpec::And(..)) {
                            Predicate::and(p.clone(), q.clone())
                        } else {
                            Predicate::or(p.clone(), q.clone())
                        };
                        out.push((pred, cat(&pf, qf)));
                    }
                }
                out
            }
            SketchSpec::Not(a) => self
                .predicates(a, tau)
                .into_iter()
                .map(|(p, f)| (Predicate::not(p), f))
                .collect(),
            SketchSpec::Atom(h, op, operand) => self.atoms(h, *op, operand, tau),
            _ => vec![],
        }
    }

    fn atoms(&self, hint: &Hint, op: CmpOp, operand: &Operand, tau: &RecordType) -> Vec<(Predicate, Factors)> {
        let mut out = Vec::new();
        for (col, ty, cf) in self.columns(hint, tau) {
            match operand {
                Operand::Value(v) => {
                    let lifted = match (v, ty) {
                        (v, t) if v.base_type() == t => v.clone(),
                        (Value::Str(s), BaseType::Number) => match s.trim().parse::<f64>() {
                            Ok(n) if n.is_finite() => Value::number(n),
                            _ => continue,
                        },
                        _ => continue,
                    };
                    let p = self.score(self.witness(&col, op, &lifted));
                    let mut f = cf.clone();
                    f.push(1.0);
                    f.push(p);
                    out.push((Predicate::compare(col.clone(), op, Expr::Value(lifted)), f));
                }
                Operand::Col(h) => {
                    for (other, oty, of) in self.columns(h, tau) {
                        if oty != ty {
                            continue;
                        }
                        let p = self.score(self.witness_columns(&col, op, &other));
                        let mut f = cat(&cf, &of);
                        f.push(p);
                        out.push((Predicate::compare(col.clone(), op, Expr::Column(other)), f));
                    }
                }
                Operand::Rel(sub) => {
                    for (q, qt, qf) in self.relations(sub) {
                        if !q.is_scalar() || qt.len() != 1 || qt.fields()[0].ty != ty {
                            continue;
                        }
                        let p = match self.scalar(&q) {
                            Some(v) => self.score(self.witness(&col, op, &v)),
                            None => PRED_EPSILON,
                        };
                        let mut f = cat(&cf, &qf);
                        f.push(p);
                        out.push((Predicate::compare(col.clone(), op, Expr::Query(Box::new(q))), f));
                    }
                }
            }
        }
        out
    }

    fn score(&self, witnessed: bool) -> f64 {
        if witnessed {
            1.0 - PRED_EPSILON
        } else {
            PRED_EPSILON
        }
    }

    fn cells(&self, attr: &Attr) -> Vec<Value> {
        let (table, column) = attr.base();
        let data = self.catalog.table(table).unwrap();
        let idx = data.column_names().position(|c| c == column).unwrap();
        data.rows().iter().map(|r| r[idx].clone()).collect()
    }

    fn witness(&self, attr: &Attr, op: CmpOp, probe: &Value) -> bool {
        self.cells(attr)
            .iter()
            .any(|v| v.sql_cmp(probe).is_some_and(|o| op.holds(o)))
    }

    fn witness_columns(&self, left: &Attr, op: CmpOp, right: &Attr) -> bool {
        let rs = self.cells(right);
        self.cells(left)
            .iter()
            .any(|a| rs.iter().any(|b| a.sql_cmp(b).is_some_and(|o| op.holds(o))))
    }

    /// Value of `f(T.c)` over a whole table, computed from the rows.
    fn scalar(&self, q: &QueryTerm) -> Option<Value> {
        let QueryTerm::Project { spec, input } = q else {
            return None;
        };
        let QueryTerm::Table(_) = input.as_ref() else {
            return None;
        };
        let SpecItem::Aggregate(func, attr) = &spec.items()[0] else {
            return None;
        };
        let cells = self.cells(attr);
        let numbers: Vec<f64> = cells.iter().filter_map(|v| v.as_number()).collect();
        match func {
            AggFunc::Count => Some(Value::number(cells.len() as f64)),
            _ if numbers.is_empty() => None,
            AggFunc::Sum => Some(Value::number(numbers.iter().sum())),
            AggFunc::Avg => Some(Value::number(numbers.iter().sum::<f64>() / numbers.len() as f64)),
            AggFunc::Max => numbers.iter().copied().reduce(f64::max).map(Value::number),
            AggFunc::Min => numbers.iter().copied().reduce(f64::min).map(Value::number),
        }
    }
}

fn agg_type(func: AggFunc, ty: BaseType) -> Option<BaseType> {
    match (func, ty) {
        (AggFunc::Count, _) => Some(BaseType::Number),
        (_, BaseType::Number) => Some(BaseType::Number),
        _ => None,
    }
}

/// Checks that `actual` holds the same top `k` as the reference ranking.
/// Scores must agree position by position to `tol`; a differing query at a
/// position is accepted only when it is tied with the reference to `tol`.
pub fn same_top(actual: &[(String, f64)], expected: &[(String, f64)], k: usize, tol: f64) -> Result<(), String> {
    let n = expected.len().min(k);
    if actual.len().min(k) != n {
        return Err(format!("{} candidates, expected {}", actual.len().min(k), n));
    }
    for i in 0..n {
        let (sql, score) = &actual[i];
        if (score - expected[i].1).abs() > tol {
            return Err(format!(
                "rank {}: score {} for {}, expected {} for {}",
                i + 1,
                score,
                sql,
                expected[i].1,
                expected[i].0
            ));
        }
        if *sql != expected[i].0 && !expected.iter().any(|(s, e)| s == sql && (e - score).abs() <= tol) {
            return Err(format!("rank {}: unexpected {} ({})", i + 1, sql, score));
        }
    }
    Ok(())
}
