//! `.gm` model files.
//!
//! ```text
//! enum Color { red, green = 5 }
//! abstract node class Shape { name: string; }
//! node class Circle extends Shape, Named { radius: float; tint: Color; }
//! containment edge class owns connect Shape --> Circle { index: int; }
//! ```
//!
//! Forward references are allowed anywhere in a file.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::error::{SyntaxError, TypeError};
use crate::lexer::{tokenize, Cursor, Tok};
use crate::types::{AttrKind, ElementKind, EnumDescriptor, TypeDescriptor, TypeGraph, TypeGraphBuilder};

pub fn parse_model(src: &str) -> Result<TypeGraph, TypeError> {
    let mut cur = Cursor::new(tokenize(src)?);
    let mut b = TypeGraphBuilder::new();
    while !cur.at(&Tok::Eof) {
        if cur.eat_keyword("enum") {
            b.add_enum(parse_enum(&mut cur)?);
        } else {
            b.add_type(parse_class(&mut cur)?);
        }
    }
    b.build()
}

fn parse_enum(cur: &mut Cursor) -> Result<EnumDescriptor, SyntaxError> {
    let name = cur.ident()?;
    cur.expect(&Tok::LBrace)?;
    let mut items = Vec::new();
    let mut next = 0i64;
    while !cur.at(&Tok::RBrace) {
        let item = cur.ident()?;
        if cur.eat(&Tok::Assign) {
            let neg = cur.eat(&Tok::Minus);
            match cur.next() {
                Tok::Int(v) => next = if neg { -v } else { v },
                _ => return Err(cur.error("expected integer enum value")),
            }
        }
        items.push((item, next));
        next = next.wrapping_add(1);
        if !cur.eat(&Tok::Comma) {
            break;
        }
    }
    cur.expect(&Tok::RBrace)?;
    Ok(EnumDescriptor { name, items })
}

fn parse_class(cur: &mut Cursor) -> Result<TypeDescriptor, SyntaxError> {
    let mut is_abstract = false;
    let mut containment = false;
    loop {
        if cur.eat_keyword("abstract") {
            is_abstract = true;
        } else if cur.eat_keyword("containment") {
            containment = true;
        } else {
            break;
        }
    }
    let kind = if cur.eat_keyword("node") {
        ElementKind::Node
    } else if cur.eat_keyword("edge") {
        ElementKind::Edge
    } else {
        return Err(cur.unexpected("`node class`, `edge class` or `enum`"));
    };
    if containment && kind == ElementKind::Node {
        return Err(cur.error("`containment` applies to edge classes only"));
    }
    cur.expect_keyword("class")?;
    let mut desc = TypeDescriptor::new(kind, cur.ident()?);
    desc.is_abstract = is_abstract;
    desc.containment = containment;
    if cur.eat_keyword("extends") {
        loop {
            desc.supertypes.push(cur.ident()?);
            if !cur.eat(&Tok::Comma) {
                break;
            }
        }
    }
    if kind == ElementKind::Edge && cur.eat_keyword("connect") {
        let src = cur.ident()?;
        cur.expect(&Tok::Minus)?;
        cur.expect(&Tok::Arrow)?;
        let trg = cur.ident()?;
        desc.connect = Some((src, trg));
    }
    if cur.eat(&Tok::Semi) {
        return Ok(desc);
    }
    cur.expect(&Tok::LBrace)?;
    while !cur.eat(&Tok::RBrace) {
        let name = cur.ident()?;
        cur.expect(&Tok::Colon)?;
        let kind = parse_kind(cur)?;
        cur.expect(&Tok::Semi)?;
        desc.attributes.push((name, kind));
    }
    Ok(desc)
}

pub(crate) fn parse_kind(cur: &mut Cursor) -> Result<AttrKind, SyntaxError> {
    let loc = cur.loc();
    let name = cur.ident()?;
    let nested = |k: Result<AttrKind, TypeError>| {
        k.map_err(|_| SyntaxError {
            loc,
            message: "container kinds may only hold scalar kinds".into(),
        })
    };
    Ok(match name.as_str() {
        "int" => AttrKind::Int,
        "float" | "double" => AttrKind::Float,
        "boolean" => AttrKind::Boolean,
        "string" => AttrKind::String,
        "set" | "array" => {
            cur.expect(&Tok::Lt)?;
            let elem = parse_kind(cur)?;
            cur.expect(&Tok::Gt)?;
            if name == "set" {
                nested(AttrKind::set_of(elem))?
            } else {
                nested(AttrKind::array_of(elem))?
            }
        }
        "map" => {
            cur.expect(&Tok::Lt)?;
            let k = parse_kind(cur)?;
            cur.expect(&Tok::Comma)?;
            let v = parse_kind(cur)?;
            cur.expect(&Tok::Gt)?;
            nested(AttrKind::map_of(k, v))?
        }
        _ => AttrKind::Enum(name),
    })
}

/// Renders declarations so that `parse_model` reproduces an equal graph.
pub fn print_model(tg: &TypeGraph) -> String {
    let mut out = String::new();
    let (types, enums) = tg.declarations();
    for e in enums {
        let _ = write!(out, "enum {} {{ ", e.name);
        for (i, (item, value)) in e.items.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            let _ = write!(out, "{item} = {value}");
        }
        out.push_str(" }\n");
    }
    for t in types {
        if t.is_abstract {
            out.push_str("abstract ");
        }
        if t.containment {
            out.push_str("containment ");
        }
        let _ = write!(out, "{} class {}", t.kind.as_str(), t.name);
        if !t.supertypes.is_empty() {
            let _ = write!(out, " extends {}", t.supertypes.join(", "));
        }
        if let Some((src, trg)) = &t.connect {
            let _ = write!(out, " connect {src} --> {trg}");
        }
        if t.attributes.is_empty() {
            out.push_str(";\n");
        } else {
            out.push_str(" {\n");
            for (name, kind) in &t.attributes {
                let _ = writeln!(out, "    {name}: {kind};");
            }
            out.push_str("}\n");
        }
    }
    out
}
