use alloc::string::String;

use super::{Hint, Operand, SketchRel, SketchSpec};

/// Renders a sketch in its SQL-like surface syntax.
pub fn print_sketch(rel: &SketchRel) -> String {
    let mut out = String::new();
    top(rel, &mut out);
    out
}

/// Renders a specifier on its own: a column list or a predicate.
pub fn print_spec(spec: &SketchSpec) -> String {
    let mut out = String::new();
    if spec.is_column_list() {
        items(spec, &mut out);
    } else {
        predicate(spec, &mut out);
    }
    out
}

fn top(rel: &SketchRel, out: &mut String) {
    match rel {
        SketchRel::Table(_) | SketchRel::Join { .. } => from_item(rel, out),
        SketchRel::Project(spec, input) => {
            out.push_str("SELECT ");
            items(spec, out);
            out.push_str(" FROM ");
            match input.as_ref() {
                SketchRel::Select(pred, inner) => {
                    from_item(inner, out);
                    out.push_str(" WHERE ");
                    predicate(pred, out);
                }
                other => from_item(other, out),
            }
        }
        SketchRel::Select(pred, input) => {
            out.push_str("SELECT * FROM ");
            from_item(input, out);
            out.push_str(" WHERE ");
            predicate(pred, out);
        }
    }
}

fn from_item(rel: &SketchRel, out: &mut String) {
    match rel {
        SketchRel::Table(h) => {
            out.push_str("??");
            hint(h, out);
        }
        SketchRel::Join {
            left,
            left_col,
            right_col,
            right,
        } => {
            from_item(left, out);
            out.push_str(" JOIN ");
            if matches!(right.as_ref(), SketchRel::Join { .. }) {
                out.push('(');
                from_item(right, out);
                out.push(')');
            } else {
                from_item(right, out);
            }
            out.push_str(" ON ?");
            hint(left_col, out);
            out.push_str(" = ?");
            hint(right_col, out);
        }
        SketchRel::Project(..) | SketchRel::Select(..) => {
            out.push('(');
            top(rel, out);
            out.push(')');
        }
    }
}

fn hint(h: &Hint, out: &mut String) {
    if let Some(text) = h.text() {
        out.push('[');
        for c in text.chars() {
            if c == ']' || c == '\\' {
                out.push('\\');
            }
            out.push(c);
        }
        out.push(']');
    }
}

fn items(spec: &SketchSpec, out: &mut String) {
    match spec {
        SketchSpec::Col(h) => {
            out.push('?');
            hint(h, out);
        }
        SketchSpec::Agg(f, h) => {
            out.push_str(f.name());
            out.push_str("(?");
            hint(h, out);
            out.push(')');
        }
        SketchSpec::Group(f, target, key) => {
            out.push_str(f.name());
            out.push_str("(?");
            hint(target, out);
            out.push_str(") BY ?");
            hint(key, out);
        }
        SketchSpec::List(a, b) => {
            items(a, out);
            out.push_str(", ");
            if matches!(b.as_ref(), SketchSpec::List(..)) {
                out.push('(');
                items(b, out);
                out.push(')');
            } else {
                items(b, out);
            }
        }
        other => predicate(other, out),
    }
}

fn precedence(spec: &SketchSpec) -> u8 {
    match spec {
        SketchSpec::Or(..) => 1,
        SketchSpec::And(..) => 2,
        SketchSpec::Not(_) => 3,
        _ => 4,
    }
}

fn predicate(spec: &SketchSpec, out: &mut String) {
    let wrapped = |child: &SketchSpec, paren: bool, out: &mut String| {
        if paren {
            out.push('(');
            predicate(child, out);
            out.push(')');
        } else {
            predicate(child, out);
        }
    };
    match spec {
        SketchSpec::And(a, b) | SketchSpec::Or(a, b) => {
            let own = precedence(spec);
            wrapped(a, precedence(a) < own, out);
            out.push_str(if own == 2 { " AND " } else { " OR " });
            wrapped(b, precedence(b) <= own, out);
        }
        SketchSpec::Not(a) => {
            out.push_str("NOT ");
            wrapped(a, precedence(a) < 3, out);
        }
        SketchSpec::Atom(h, op, operand) => {
            out.push('?');
            hint(h, out);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            match operand {
                Operand::Col(h) => {
                    out.push('?');
                    hint(h, out);
                }
                Operand::Value(v) => out.push_str(&alloc::format!("{}", v)),
                Operand::Rel(r) => {
                    out.push('(');
                    top(r, out);
                    out.push(')');
                }
            }
        }
        other => items(other, out),
    }
}
