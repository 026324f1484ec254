//! Attribute values and their textual literal form.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::lexer::{tokenize, Cursor, Tok};
use crate::types::{AttrKind, TypeGraph};

#[derive(Debug, Clone, PartialEq)]
pub enum AttributeValue {
    Int(i64),
    Float(f64),
    Boolean(bool),
    String(String),
    Enum { ty: String, item: String },
    /// Kept sorted and free of duplicates.
    Set(Vec<AttributeValue>),
    /// Kept sorted by key, keys unique.
    Map(Vec<(AttributeValue, AttributeValue)>),
    Array(Vec<AttributeValue>),
}

impl AttributeValue {
    /// Value a fresh attribute slot of `kind` holds.
    pub fn default_for(kind: &AttrKind, tg: &TypeGraph) -> AttributeValue {
        match kind {
            AttrKind::Int => AttributeValue::Int(0),
            AttrKind::Float => AttributeValue::Float(0.0),
            AttrKind::Boolean => AttributeValue::Boolean(false),
            AttrKind::String => AttributeValue::String(String::new()),
            AttrKind::Enum(name) => {
                let item = tg
                    .enum_type(name)
                    .and_then(|e| e.items.first())
                    .map(|(n, _)| n.clone())
                    .unwrap_or_default();
                AttributeValue::Enum {
                    ty: name.clone(),
                    item,
                }
            }
            AttrKind::Set(_) => AttributeValue::Set(Vec::new()),
            AttrKind::Map(..) => AttributeValue::Map(Vec::new()),
            AttrKind::Array(_) => AttributeValue::Array(Vec::new()),
        }
    }

    pub fn conforms(&self, kind: &AttrKind) -> bool {
        match (self, kind) {
            (AttributeValue::Int(_), AttrKind::Int)
            | (AttributeValue::Float(_), AttrKind::Float)
            | (AttributeValue::Boolean(_), AttrKind::Boolean)
            | (AttributeValue::String(_), AttrKind::String) => true,
            (AttributeValue::Enum { ty, .. }, AttrKind::Enum(name)) => ty == name,
            (AttributeValue::Set(items), AttrKind::Set(e)) | (AttributeValue::Array(items), AttrKind::Array(e)) => {
                items.iter().all(|v| v.conforms(e))
            }
            (AttributeValue::Map(entries), AttrKind::Map(k, v)) => {
                entries.iter().all(|(a, b)| a.conforms(k) && b.conforms(v))
            }
            _ => false,
        }
    }

    pub fn kind_name(&self) -> String {
        match self {
            AttributeValue::Int(_) => "int".into(),
            AttributeValue::Float(_) => "float".into(),
            AttributeValue::Boolean(_) => "boolean".into(),
            AttributeValue::String(_) => "string".into(),
            AttributeValue::Enum { ty, .. } => ty.clone(),
            AttributeValue::Set(_) => "set".into(),
            AttributeValue::Map(_) => "map".into(),
            AttributeValue::Array(_) => "array".into(),
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            AttributeValue::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            AttributeValue::String(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            AttributeValue::Boolean(b) => Some(*b),
            _ => None,
        }
    }

    /// Plain text form used by `emit`: strings unquoted, everything else as its literal.
    pub fn to_text(&self) -> String {
        match self {
            AttributeValue::String(s) => s.clone(),
            other => other.to_string(),
        }
    }

    /// Total order used to normalize sets and maps. Floats order by `total_cmp`.
    pub fn total_cmp(&self, other: &Self) -> Ordering {
        use AttributeValue::*;
        fn rank(v: &AttributeValue) -> u8 {
            match v {
                Int(_) => 0,
                Float(_) => 1,
                Boolean(_) => 2,
                String(_) => 3,
                Enum { .. } => 4,
                Set(_) => 5,
                Map(_) => 6,
                Array(_) => 7,
            }
        }
        match (self, other) {
            (Int(a), Int(b)) => a.cmp(b),
            (Float(a), Float(b)) => a.total_cmp(b),
            (Boolean(a), Boolean(b)) => a.cmp(b),
            (String(a), String(b)) => a.cmp(b),
            (Enum { ty: t1, item: i1 }, Enum { ty: t2, item: i2 }) => (t1, i1).cmp(&(t2, i2)),
            (Set(a), Set(b)) | (Array(a), Array(b)) => cmp_seq(a.iter(), b.iter(), |x, y| x.total_cmp(y)),
            (Map(a), Map(b)) => cmp_seq(a.iter(), b.iter(), |x, y| {
                x.0.total_cmp(&y.0).then_with(|| x.1.total_cmp(&y.1))
            }),
            _ => rank(self).cmp(&rank(other)),
        }
    }

    pub fn normalized(self) -> AttributeValue {
        match self {
            AttributeValue::Set(mut items) => {
                items.sort_by(|a, b| a.total_cmp(b));
                items.dedup_by(|a, b| a.total_cmp(b) == Ordering::Equal);
                AttributeValue::Set(items)
            }
            AttributeValue::Map(mut entries) => {
                // last write wins for duplicate keys
                entries.reverse();
                entries.sort_by(|a, b| a.0.total_cmp(&b.0));
                entries.dedup_by(|a, b| a.0.total_cmp(&b.0) == Ordering::Equal);
                AttributeValue::Map(entries)
            }
            other => other,
        }
    }
}

fn cmp_seq<'a, T: 'a>(
    mut a: impl Iterator<Item = &'a T>,
    mut b: impl Iterator<Item = &'a T>,
    f: impl Fn(&T, &T) -> Ordering,
) -> Ordering {
    loop {
        match (a.next(), b.next()) {
            (None, None) => return Ordering::Equal,
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(x), Some(y)) => match f(x, y) {
                Ordering::Equal => {}
                o => return o,
            },
        }
    }
}

pub fn escape_string(s: &str, out: &mut String) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
}

impl fmt::Display for AttributeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttributeValue::Int(v) => write!(f, "{v}"),
            AttributeValue::Float(v) => write!(f, "{v:?}"),
            AttributeValue::Boolean(v) => write!(f, "{v}"),
            AttributeValue::String(s) => {
                let mut out = String::new();
                escape_string(s, &mut out);
                f.write_str(&out)
            }
            AttributeValue::Enum { ty, item } => write!(f, "{ty}::{item}"),
            AttributeValue::Set(items) => {
                f.write_str("{")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("}")
            }
            AttributeValue::Map(entries) => {
                f.write_str("{")?;
                for (i, (k, v)) in entries.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{k} -> {v}")?;
                }
                f.write_str("}")
            }
            AttributeValue::Array(items) => {
                f.write_str("[")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
        }
    }
}

/// Parses a literal in the `Display` form, guided by the expected kind.
pub fn parse_literal(text: &str, kind: &AttrKind, tg: &TypeGraph) -> Result<AttributeValue, String> {
    let toks = tokenize(text).map_err(|e| e.to_string())?;
    let mut cur = Cursor::new(toks);
    let v = literal(&mut cur, kind, tg)?;
    if !cur.at(&Tok::Eof) {
        return Err(format!("trailing input after {kind} literal"));
    }
    Ok(v)
}

fn literal(cur: &mut Cursor, kind: &AttrKind, tg: &TypeGraph) -> Result<AttributeValue, String> {
    let bad = |cur: &Cursor| format!("expected {kind} literal, found {}", cur.peek());
    match kind {
        AttrKind::Int => {
            let neg = cur.eat(&Tok::Minus);
            match cur.peek().clone() {
                Tok::Int(v) => {
                    cur.next();
                    Ok(AttributeValue::Int(if neg { v.wrapping_neg() } else { v }))
                }
                _ => Err(bad(cur)),
            }
        }
        AttrKind::Float => {
            let neg = cur.eat(&Tok::Minus);
            let v = match cur.peek().clone() {
                Tok::Int(v) => v as f64,
                Tok::Float(v) => v,
                Tok::Ident(s) if s == "inf" => f64::INFINITY,
                Tok::Ident(s) if s == "NaN" => f64::NAN,
                _ => return Err(bad(cur)),
            };
            cur.next();
            Ok(AttributeValue::Float(if neg { -v } else { v }))
        }
        AttrKind::Boolean => match cur.next() {
            Tok::Ident(s) if s == "true" => Ok(AttributeValue::Boolean(true)),
            Tok::Ident(s) if s == "false" => Ok(AttributeValue::Boolean(false)),
            _ => Err(format!("expected boolean literal")),
        },
        AttrKind::String => match cur.next() {
            Tok::Str(s) => Ok(AttributeValue::String(s)),
            _ => Err("expected string literal".into()),
        },
        AttrKind::Enum(name) => {
            let ty = cur.ident().map_err(|e| e.message)?;
            if &ty != name {
                return Err(format!("expected item of enum `{name}`, found `{ty}`"));
            }
            cur.expect(&Tok::ColonColon).map_err(|e| e.message)?;
            let item = cur.ident().map_err(|e| e.message)?;
            let known = tg.enum_type(name).is_some_and(|e| e.item_value(&item).is_some());
            if !known {
                return Err(format!("`{item}` is not an item of enum `{name}`"));
            }
            Ok(AttributeValue::Enum { ty, item })
        }
        AttrKind::Set(elem) | AttrKind::Array(elem) => {
            let is_set = matches!(kind, AttrKind::Set(_));
            let (open, close) = if is_set {
                (Tok::LBrace, Tok::RBrace)
            } else {
                (Tok::LBracket, Tok::RBracket)
            };
            cur.expect(&open).map_err(|e| e.message)?;
            let mut items = Vec::new();
            while !cur.at(&close) {
                items.push(literal(cur, elem, tg)?);
                if !cur.eat(&Tok::Comma) {
                    break;
                }
            }
            cur.expect(&close).map_err(|e| e.message)?;
            Ok(if is_set {
                AttributeValue::Set(items).normalized()
            } else {
                AttributeValue::Array(items)
            })
        }
        AttrKind::Map(k, v) => {
            cur.expect(&Tok::LBrace).map_err(|e| e.message)?;
            let mut entries = Vec::new();
            while !cur.at(&Tok::RBrace) {
                let key = literal(cur, k, tg)?;
                cur.expect(&Tok::Arrow).map_err(|e| e.message)?;
                let val = literal(cur, v, tg)?;
                entries.push((key, val));
                if !cur.eat(&Tok::Comma) {
                    break;
                }
            }
            cur.expect(&Tok::RBrace).map_err(|e| e.message)?;
            Ok(AttributeValue::Map(entries).normalized())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model;
    use alloc::boxed::Box;
    use alloc::vec;

    fn tg() -> TypeGraph {
        parse_model("enum Color { red, green }").unwrap()
    }

    #[test]
    fn defaults_per_kind() {
        let tg = tg();
        assert_eq!(AttributeValue::default_for(&AttrKind::Int, &tg), AttributeValue::Int(0));
        assert_eq!(AttributeValue::default_for(&AttrKind::Float, &tg), AttributeValue::Float(0.0));
        assert_eq!(
            AttributeValue::default_for(&AttrKind::Enum("Color".into()), &tg),
            AttributeValue::Enum {
                ty: "Color".into(),
                item: "red".into()
            }
        );
        assert_eq!(
            AttributeValue::default_for(&AttrKind::Set(Box::new(AttrKind::Int)), &tg),
            AttributeValue::Set(vec![])
        );
    }

    #[test]
    fn literals_round_trip() {
        let tg = tg();
        let cases: &[(&str, AttrKind)] = &[
            ("-42", AttrKind::Int),
            ("2.5", AttrKind::Float),
            ("-0.0", AttrKind::Float),
            ("1e100", AttrKind::Float),
            ("true", AttrKind::Boolean),
            (r#""a \"q\"\n\\ b""#, AttrKind::String),
            ("Color::green", AttrKind::Enum("Color".into())),
            ("{1, 2, 3}", AttrKind::Set(Box::new(AttrKind::Int))),
            (r#"{"a" -> Color::red}"#, AttrKind::Map(Box::new(AttrKind::String), Box::new(AttrKind::Enum("Color".into())))),
            ("[3, 1, 3]", AttrKind::Array(Box::new(AttrKind::Int))),
        ];
        for (text, kind) in cases {
            let v = parse_literal(text, kind, &tg).unwrap();
            assert!(v.conforms(kind));
            assert_eq!(&v.to_string(), text);
        }
    }

    #[test]
    fn sets_normalize() {
        let v = parse_literal("{3, 1, 3}", &AttrKind::Set(Box::new(AttrKind::Int)), &tg()).unwrap();
        assert_eq!(v.to_string(), "{1, 3}");
    }

    #[test]
    fn bad_literals() {
        let tg = tg();
        assert!(parse_literal("\"x\"", &AttrKind::Int, &tg).is_err());
        assert!(parse_literal("Color::blue", &AttrKind::Enum("Color".into()), &tg).is_err());
        assert!(parse_literal("1 2", &AttrKind::Int, &tg).is_err());
    }
}
