//! Derivation rules from utterances to sketches.
//!
//! A derivation reads an opener, a list of projected items, an optional
//! `of <entity>` phrase and then any number of modifiers: conditions,
//! superlatives, group keys and connectives. Any token may instead be
//! skipped, which the model sees as a penalty feature.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::tokens::{TokenKind, Utterance};
use super::{Derivation, FeatureVector};
use crate::algebra::{AggFunc, CmpOp, Value};
use crate::sketch::{Hint, Operand, SketchRel, SketchSpec};

pub const MAX_DERIVATIONS: usize = 500;
const MAX_SKIPS: usize = 4;
const MAX_NOUN_SPAN: usize = 3;

const IMPERATIVES: &[&str] = &[
    "find", "list", "show", "retrieve", "get", "give", "return", "display", "print", "tell",
];
const DETERMINERS: &[&str] = &["the", "all", "a", "an", "any", "every"];
const PRONOUNS: &[&str] = &["me", "us"];
const COPULAS: &[&str] = &["is", "are", "was", "were", "has", "have", "had", "do", "does", "did"];
const INTROS: &[&str] = &[
    "in", "with", "for", "from", "where", "whose", "having", "on", "at", "during", "named", "called", "of", "that",
    "who", "which",
];
const CONNECTIVES: &[&str] = &["and", "or", "but"];

const AGGREGATES: &[(&str, AggFunc)] = &[
    ("average", AggFunc::Avg),
    ("avg", AggFunc::Avg),
    ("mean", AggFunc::Avg),
    ("total", AggFunc::Sum),
    ("sum", AggFunc::Sum),
    ("maximum", AggFunc::Max),
    ("max", AggFunc::Max),
    ("highest", AggFunc::Max),
    ("largest", AggFunc::Max),
    ("greatest", AggFunc::Max),
    ("biggest", AggFunc::Max),
    ("most", AggFunc::Max),
    ("minimum", AggFunc::Min),
    ("min", AggFunc::Min),
    ("lowest", AggFunc::Min),
    ("smallest", AggFunc::Min),
    ("least", AggFunc::Min),
    ("fewest", AggFunc::Min),
];

const SUPERLATIVES: &[(&str, AggFunc)] = &[
    ("highest", AggFunc::Max),
    ("largest", AggFunc::Max),
    ("greatest", AggFunc::Max),
    ("biggest", AggFunc::Max),
    ("most", AggFunc::Max),
    ("maximum", AggFunc::Max),
    ("top", AggFunc::Max),
    ("oldest", AggFunc::Max),
    ("lowest", AggFunc::Min),
    ("smallest", AggFunc::Min),
    ("least", AggFunc::Min),
    ("fewest", AggFunc::Min),
    ("minimum", AggFunc::Min),
    ("youngest", AggFunc::Min),
];

const COMPARATORS: &[(&[&str], CmpOp)] = &[
    (&["greater", "than"], CmpOp::Gt),
    (&["more", "than"], CmpOp::Gt),
    (&["larger", "than"], CmpOp::Gt),
    (&["higher", "than"], CmpOp::Gt),
    (&["bigger", "than"], CmpOp::Gt),
    (&["older", "than"], CmpOp::Gt),
    (&["over"], CmpOp::Gt),
    (&["above"], CmpOp::Gt),
    (&["after"], CmpOp::Gt),
    (&["exceeding"], CmpOp::Gt),
    (&["at", "least"], CmpOp::Ge),
    (&["less", "than"], CmpOp::Lt),
    (&["fewer", "than"], CmpOp::Lt),
    (&["smaller", "than"], CmpOp::Lt),
    (&["lower", "than"], CmpOp::Lt),
    (&["younger", "than"], CmpOp::Lt),
    (&["under"], CmpOp::Lt),
    (&["below"], CmpOp::Lt),
    (&["before"], CmpOp::Lt),
    (&["at", "most"], CmpOp::Le),
    (&["equal", "to"], CmpOp::Eq),
    (&["equals"], CmpOp::Eq),
    (&[">"], CmpOp::Gt),
    (&[">="], CmpOp::Ge),
    (&["<"], CmpOp::Lt),
    (&["<="], CmpOp::Le),
    (&["="], CmpOp::Eq),
];

const OTHER_FUNCTION_WORDS: &[&str] = &[
    "than", "to", "each", "not", "how", "many", "what", "by", "per", "please", "there", "whom",
];

fn is_function_word(w: &str) -> bool {
    IMPERATIVES.contains(&w)
        || DETERMINERS.contains(&w)
        || PRONOUNS.contains(&w)
        || COPULAS.contains(&w)
        || INTROS.contains(&w)
        || CONNECTIVES.contains(&w)
        || OTHER_FUNCTION_WORDS.contains(&w)
        || AGGREGATES.iter().any(|(a, _)| *a == w)
        || SUPERLATIVES.iter().any(|(a, _)| *a == w)
        || COMPARATORS.iter().any(|(ws, _)| ws.len() == 1 && ws[0] == w)
}

fn lookup(table: &[(&str, AggFunc)], w: &str) -> Option<AggFunc> {
    table.iter().find(|(a, _)| *a == w).map(|(_, f)| *f)
}

type Span = (usize, usize);

#[derive(Debug, Clone, PartialEq)]
enum Item {
    Col(Span),
    Agg(AggFunc, Span),
}

#[derive(Debug, Clone, PartialEq)]
enum Condition {
    Value {
        attr: Option<Span>,
        op: CmpOp,
        value: Value,
    },
    Extreme {
        func: AggFunc,
        attr: Span,
        lhs: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Joiner {
    And,
    Or,
}

/// Parser position plus everything derived so far.
#[derive(Debug, Clone)]
struct State {
    pos: usize,
    consumed: Vec<Option<&'static str>>,
    rules: Vec<&'static str>,
    lexical: Vec<String>,
    items: Vec<Item>,
    entity: Option<Span>,
    who: bool,
    conditions: Vec<(Joiner, bool, Condition)>,
    pending: Option<Joiner>,
    negate: bool,
    group: Option<Span>,
    values: usize,
}

impl State {
    fn mark(&mut self, from: usize, to: usize, rule: &'static str) {
        for slot in &mut self.consumed[from..to] {
            *slot = Some(rule);
        }
        self.pos = self.pos.max(to);
    }

    fn skips(&self) -> usize {
        self.consumed[..self.pos].iter().filter(|c| c.is_none()).count()
    }
}

struct Deriver<'u> {
    u: &'u Utterance,
    out: Vec<Derivation>,
}

impl<'u> Deriver<'u> {
    fn word(&self, i: usize) -> Option<&str> {
        self.u
            .tokens()
            .get(i)
            .filter(|t| matches!(t.kind, TokenKind::Word | TokenKind::Symbol))
            .map(|t| t.text.as_str())
    }

    fn is(&self, i: usize, set: &[&str]) -> bool {
        self.word(i).is_some_and(|w| set.contains(&w))
    }

    fn full(&self) -> bool {
        self.out.len() >= MAX_DERIVATIONS
    }

    /// Skips an optional word from `set` at `i`, returning the next position.
    fn optional(&self, i: usize, set: &[&str]) -> usize {
        if self.is(i, set) {
            i + 1
        } else {
            i
        }
    }

    fn is_noun(&self, i: usize) -> bool {
        self.u
            .tokens()
            .get(i)
            .is_some_and(|t| t.kind == TokenKind::Word && !is_function_word(&t.text))
    }

    /// Noun spans starting at `i`, longest first.
    fn nouns(&self, i: usize) -> Vec<Span> {
        let mut end = i;
        while end < self.u.len() && end - i < MAX_NOUN_SPAN && self.is_noun(end) {
            if end > i && !self.u.adjacent(end - 1) {
                break;
            }
            end += 1;
        }
        (i + 1..=end).rev().map(|e| (i, e)).collect()
    }

    /// Value candidates starting at `i`: a quoted span, a run of capitalized
    /// words and numbers, or a single number.
    fn values(&self, i: usize) -> Vec<(Span, Value)> {
        let Some(tok) = self.u.tokens().get(i) else {
            return Vec::new();
        };
        match tok.kind {
            TokenKind::Quoted => {
                alloc::vec![((i, i + 1), Value::string(self.u.original(i)))]
            }
            TokenKind::Number => {
                let mut out = Vec::new();
                let run = self.proper_run(i);
                if run > i + 1 {
                    out.push(((i, run), Value::string(self.u.span_text(i, run))));
                }
                let n = crate::algebra::parse_number(&tok.text).unwrap_or(0.0);
                out.push(((i, i + 1), Value::number(n)));
                out
            }
            TokenKind::Word if self.u.is_capitalized(i) && i > 0 => {
                let run = self.proper_run(i);
                alloc::vec![((i, run), Value::string(self.u.span_text(i, run)))]
            }
            _ => Vec::new(),
        }
    }

    /// End of the maximal run of capitalized words and numbers from `i`
    /// that contains at least one capitalized word.
    fn proper_run(&self, i: usize) -> usize {
        let mut end = i;
        let mut capitalized = false;
        while end < self.u.len() {
            let t = &self.u.tokens()[end];
            let ok = match t.kind {
                TokenKind::Number => true,
                TokenKind::Word => self.u.is_capitalized(end) && !is_function_word(&t.text),
                _ => false,
            };
            if !ok || (end > i && !self.u.adjacent(end - 1)) {
                break;
            }
            capitalized |= t.kind == TokenKind::Word;
            end += 1;
        }
        if capitalized {
            end
        } else {
            i + 1
        }
    }

    fn comparator(&self, i: usize) -> Option<(CmpOp, usize)> {
        COMPARATORS.iter().find_map(|(words, op)| {
            words
                .iter()
                .enumerate()
                .all(|(k, w)| self.word(i + k) == Some(*w))
                .then_some((*op, i + words.len()))
        })
    }

    fn run(&mut self) {
        let n = self.u.len();
        let start = State {
            pos: 0,
            consumed: alloc::vec![None; n],
            rules: Vec::new(),
            lexical: Vec::new(),
            items: Vec::new(),
            entity: None,
            who: false,
            conditions: Vec::new(),
            pending: None,
            negate: false,
            group: None,
            values: 0,
        };
        for opened in self.openers(start) {
            self.items(opened);
            if self.full() {
                return;
            }
        }
    }

    fn openers(&self, base: State) -> Vec<State> {
        let mut out = Vec::new();
        let Some(first) = self.word(0) else {
            return out;
        };
        let mut s = base.clone();
        if IMPERATIVES.contains(&first) {
            s.mark(0, 1, "opener");
            let next = self.optional(1, PRONOUNS);
            s.mark(1, next, "opener");
            s.lexical.push(format!("opener:{}", first));
            out.push(s);
        } else if first == "what" {
            let next = self.optional(1, COPULAS);
            s.mark(0, next, "opener");
            s.lexical.push("opener:what".into());
            out.push(s);
        } else if first == "which" {
            s.mark(0, 1, "opener");
            s.lexical.push("opener:which".into());
            out.push(s);
        } else if first == "who" {
            s.mark(0, 1, "opener");
            s.lexical.push("opener:who".into());
            s.who = true;
            s.items.push(Item::Col((1, 1)));
            out.push(s);
        } else if first == "how" && self.word(1) == Some("many") {
            s.mark(0, 2, "opener");
            s.lexical.push("opener:how_many".into());
            for noun in self.nouns(2) {
                let mut t = s.clone();
                t.mark(noun.0, noun.1, "item");
                t.rules.push("item_count");
                t.items.push(Item::Agg(AggFunc::Count, noun));
                out.push(t);
            }
        }
        for s in &mut out {
            s.rules.push("opener");
        }
        out
    }

    /// Single items starting at `i`.
    fn item_at(&self, i: usize) -> Vec<(Item, usize, &'static str, Option<String>)> {
        let mut out = Vec::new();
        let at = self.optional(i, DETERMINERS);
        if let Some(w) = self.word(at) {
            if (w == "number" || w == "count") && self.word(at + 1) == Some("of") {
                let from = self.optional(at + 2, DETERMINERS);
                for noun in self.nouns(from) {
                    out.push((Item::Agg(AggFunc::Count, noun), noun.1, "item_count", None));
                }
            }
            if let Some(func) = lookup(AGGREGATES, w) {
                let mut from = at + 1;
                if self.word(from) == Some("number") && self.word(from + 1) == Some("of") {
                    from += 2;
                }
                let from = self.optional(self.optional(from, &["of"]), DETERMINERS);
                for noun in self.nouns(from) {
                    out.push((Item::Agg(func, noun), noun.1, "item_agg", Some(format!("agg:{}", w))));
                }
            }
        }
        for noun in self.nouns(at) {
            out.push((Item::Col(noun), noun.1, "item_col", None));
        }
        out
    }

    fn items(&mut self, s: State) {
        if s.who {
            self.modifiers(s);
            return;
        }
        if !s.items.is_empty() {
            self.after_items(s);
            return;
        }
        self.item_list(s);
    }

    fn item_list(&mut self, s: State) {
        for (item, end, rule, lex) in self.item_at(s.pos) {
            if self.full() {
                return;
            }
            let mut t = s.clone();
            let begin = t.pos;
            t.mark(begin, end, "item");
            t.rules.push(rule);
            t.lexical.extend(lex);
            t.items.push(item);
            // Another item may follow after "and" or punctuation.
            let joined = self.is(end, &["and"]);
            if joined || (end < self.u.len() && end > 0 && !self.u.adjacent(end - 1)) {
                let mut more = t.clone();
                if joined {
                    more.mark(end, end + 1, "item");
                }
                more.rules.push("item_list");
                self.item_list(more);
            }
            self.after_items(t);
        }
    }

    fn after_items(&mut self, s: State) {
        if self.is(s.pos, &["of"]) {
            let from = self.optional(s.pos + 1, DETERMINERS);
            for noun in self.nouns(from) {
                let mut t = s.clone();
                let begin = t.pos;
                t.mark(begin, noun.1, "entity");
                t.rules.push("entity");
                t.entity = Some(noun);
                self.modifiers(t);
            }
        }
        self.modifiers(s);
    }

    fn modifiers(&mut self, s: State) {
        if self.full() {
            return;
        }
        let i = s.pos;
        if i >= self.u.len() {
            self.finish(s);
            return;
        }
        if let Some(w) = self.word(i).map(String::from) {
            let w = w.as_str();
            if CONNECTIVES.contains(&w) && !s.conditions.is_empty() && s.pending.is_none() {
                let mut t = s.clone();
                t.mark(i, i + 1, "connective");
                t.pending = Some(if w == "or" { Joiner::Or } else { Joiner::And });
                t.rules.push(if w == "or" { "or" } else { "and" });
                self.modifiers(t);
            }
            if w == "not" && !s.negate {
                let mut t = s.clone();
                t.mark(i, i + 1, "negation");
                t.negate = true;
                t.rules.push("not");
                self.modifiers(t);
            }
        }
        self.group(&s);
        self.conditions(&s);
        if s.skips() < MAX_SKIPS {
            let mut t = s.clone();
            t.pos = i + 1;
            self.modifiers(t);
        }
    }

    fn group(&mut self, s: &State) {
        if s.group.is_some() || s.items.len() != 1 || !matches!(s.items[0], Item::Agg(..)) {
            return;
        }
        let i = s.pos;
        let from = if self.is(i, &["by", "per"]) {
            self.optional(i + 1, &["each", "every"])
        } else if self.is(i, &["for", "in"]) && self.is(i + 1, &["each", "every"]) {
            i + 2
        } else {
            return;
        };
        let from = self.optional(from, DETERMINERS);
        for noun in self.nouns(from) {
            let mut t = s.clone();
            t.mark(i, noun.1, "group");
            t.rules.push("group");
            t.group = Some(noun);
            self.modifiers(t);
        }
    }

    fn conditions(&mut self, s: &State) {
        let mut i = s.pos;
        i = self.optional(i, COPULAS);
        let mut negated = s.negate;
        if self.is(i, &["not"]) {
            negated = !negated;
            i += 1;
        }
        let intro = self.word(i).filter(|w| INTROS.contains(w)).map(String::from);
        if intro.is_some() {
            i += 1;
        }
        if self.is(i, &["not"]) {
            negated = !negated;
            i += 1;
        }
        let i = self.optional(i, DETERMINERS);
        let mut found: Vec<(Condition, usize, &'static str, Vec<String>)> = Vec::new();
        // Superlatives: "with the highest score".
        if let Some(func) = self.word(i).and_then(|w| lookup(SUPERLATIVES, w)) {
            for noun in self.nouns(i + 1) {
                for lhs in [false, true] {
                    found.push((
                        Condition::Extreme { func, attr: noun, lhs },
                        noun.1,
                        if lhs { "superlative_attr" } else { "superlative" },
                        alloc::vec![format!("superlative:{}", func.name())],
                    ));
                }
            }
        }
        // "[attribute] [is] [comparator] value"
        let mut attrs: Vec<Option<Span>> = self.nouns(i).into_iter().map(Some).collect();
        attrs.push(None);
        for attr in attrs {
            let mut j = attr.map_or(i, |a| a.1);
            if attr.is_some() {
                j = self.optional(j, COPULAS);
            }
            let (op, j, explicit) = match self.comparator(j) {
                Some((op, next)) => (op, next, true),
                None => (CmpOp::Eq, j, false),
            };
            if intro.is_none() && attr.is_none() && !explicit {
                continue;
            }
            for ((_, end), value) in self.values(j) {
                let mut lex = Vec::new();
                if explicit {
                    lex.push(format!("cmp:{}", op.symbol()));
                }
                if attr.is_some() {
                    lex.push("cond:attr".into());
                }
                if matches!(value, Value::Number(_)) {
                    lex.push("value:number".into());
                }
                found.push((Condition::Value { attr, op, value }, end, "condition", lex));
            }
        }
        for (cond, end, rule, lex) in found {
            if self.full() {
                return;
            }
            let mut t = s.clone();
            let begin = t.pos;
            t.mark(begin, end, "condition");
            t.rules.push(rule);
            if let Some(w) = &intro {
                t.lexical.push(format!("intro:{}", w));
            }
            t.lexical.extend(lex);
            if matches!(cond, Condition::Value { .. }) {
                t.values += 1;
            }
            let joiner = t.pending.take().unwrap_or(Joiner::And);
            t.conditions.push((joiner, negated, cond));
            t.negate = false;
            self.modifiers(t);
        }
    }

    fn hint(&self, span: Span) -> Hint {
        Hint::new(self.u.span_text(span.0, span.1))
    }

    fn finish(&mut self, s: State) {
        if s.pending.is_some() || s.negate {
            return;
        }
        let entity = match (s.entity, s.items.first()) {
            (Some(e), _) => self.hint(e),
            (None, Some(Item::Col(span) | Item::Agg(_, span))) => self.hint(*span),
            (None, None) => Hint::none(),
        };
        let table = SketchRel::table(entity);
        let item_spec = |item: &Item| match item {
            Item::Col(span) => SketchSpec::Col(self.hint(*span)),
            Item::Agg(func, span) => SketchSpec::Agg(*func, self.hint(*span)),
        };
        let items = match (s.group, s.items.as_slice()) {
            (Some(key), [Item::Agg(func, span)]) => SketchSpec::Group(*func, self.hint(*span), self.hint(key)),
            _ => {
                let mut it = s.items.iter();
                let Some(first) = it.next() else {
                    return;
                };
                it.fold(item_spec(first), |acc, x| SketchSpec::list(acc, item_spec(x)))
            }
        };
        let mut predicate: Option<SketchSpec> = None;
        for (joiner, negated, cond) in &s.conditions {
            let atom = match cond {
                Condition::Value { attr, op, value } => SketchSpec::Atom(
                    attr.map_or(Hint::none(), |a| self.hint(a)),
                    *op,
                    Operand::Value(value.clone()),
                ),
                Condition::Extreme { func, attr, lhs } => {
                    let sub = SketchRel::project(SketchSpec::Agg(*func, self.hint(*attr)), table.clone());
                    let left = if *lhs { self.hint(*attr) } else { Hint::none() };
                    SketchSpec::Atom(left, CmpOp::Eq, Operand::Rel(Box::new(sub)))
                }
            };
            let atom = if *negated { SketchSpec::not(atom) } else { atom };
            predicate = Some(match (predicate, joiner) {
                (None, _) => atom,
                (Some(p), Joiner::And) => SketchSpec::and(p, atom),
                (Some(p), Joiner::Or) => SketchSpec::or(p, atom),
            });
        }
        let input = match predicate {
            Some(p) => SketchRel::select(p, table),
            None => table,
        };
        let sketch = SketchRel::project(items, input);
        let features = self.features(&s, &sketch);
        self.out.push(Derivation {
            sketch,
            rules: s.rules.iter().map(|r| String::from(*r)).collect(),
            consumed: s.consumed.iter().map(|c| c.map(String::from)).collect(),
            features,
        });
    }

    fn features(&self, s: &State, sketch: &SketchRel) -> FeatureVector {
        let mut f = FeatureVector::new();
        for r in &s.rules {
            f.add(&format!("rule:{}", r), 1.0);
        }
        for l in &s.lexical {
            f.add(l, 1.0);
        }
        let mut skipped = 0.0;
        for (i, c) in s.consumed.iter().enumerate() {
            if c.is_none() {
                skipped += 1.0;
                f.add(&format!("skip:{}", self.u.tokens()[i].text), 1.0);
            }
        }
        f.add("skipped", skipped);
        let content: BTreeSet<usize> = (0..self.u.len())
            .filter(|&i| {
                let t = &self.u.tokens()[i];
                t.kind != TokenKind::Word || !is_function_word(&t.text)
            })
            .collect();
        let covered = content.iter().filter(|&&i| s.consumed[i].is_some()).count();
        let coverage = if content.is_empty() {
            1.0
        } else {
            covered as f64 / content.len() as f64
        };
        f.add("hint_coverage", coverage);
        f.add("nodes", sketch.paths().len() as f64);
        f.add("values", s.values as f64);
        f
    }
}

pub(super) fn derive_all(u: &Utterance) -> Vec<Derivation> {
    let mut d = Deriver { u, out: Vec::new() };
    d.run();
    d.out
}
