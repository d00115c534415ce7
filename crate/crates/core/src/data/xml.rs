//! Thin schema layer over `roxmltree`: element paths, line numbers, strict
//! attribute/child checking and a deterministic writer.

use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::Vector3;

use super::DataError;
use crate::se3::Pose;

pub(crate) fn parse_document<'i>(file: &str, text: &'i str) -> Result<roxmltree::Document<'i>, DataError> {
    roxmltree::Document::parse(text).map_err(|e| {
        let pos = e.pos();
        DataError::Syntax {
            file: file.to_string(),
            line: pos.row,
            col: pos.col,
            message: e.to_string(),
        }
    })
}

/// Root element name of a document, used to sniff cached vs. raw inputs.
pub fn root_name(text: &str) -> Option<String> {
    roxmltree::Document::parse(text)
        .ok()
        .map(|d| d.root_element().tag_name().name().to_string())
}

#[derive(Clone)]
pub(crate) struct Elem<'a, 'i> {
    node: roxmltree::Node<'a, 'i>,
    doc: &'a roxmltree::Document<'i>,
    file: &'a str,
    pub path: String,
}

impl<'a, 'i> Elem<'a, 'i> {
    pub fn root(file: &'a str, doc: &'a roxmltree::Document<'i>, expected: &str) -> Result<Self, DataError> {
        let node = doc.root_element();
        let elem = Elem {
            node,
            doc,
            file,
            path: node.tag_name().name().to_string(),
        };
        if node.tag_name().name() != expected {
            return Err(elem.schema(format!("expected root element <{expected}>, found <{}>", node.tag_name().name())));
        }
        Ok(elem)
    }

    pub fn name(&self) -> &str {
        self.node.tag_name().name()
    }

    pub fn line(&self) -> u32 {
        self.doc.text_pos_at(self.node.range().start).row
    }

    pub fn schema(&self, message: impl Into<String>) -> DataError {
        DataError::Schema {
            file: self.file.to_string(),
            line: self.line(),
            element: self.path.clone(),
            message: message.into(),
        }
    }

    pub fn semantic(&self, message: impl Into<String>) -> DataError {
        DataError::Semantic {
            file: self.file.to_string(),
            line: self.line(),
            element: self.path.clone(),
            message: message.into(),
        }
    }

    pub fn allow_attrs(&self, allowed: &[&str]) -> Result<(), DataError> {
        for a in self.node.attributes() {
            if !allowed.contains(&a.name()) {
                return Err(self.schema(format!("unexpected attribute '{}'", a.name())));
            }
        }
        Ok(())
    }

    pub fn allow_children(&self, allowed: &[&str]) -> Result<(), DataError> {
        for c in self.node.children() {
            if c.is_element() && !allowed.contains(&c.tag_name().name()) {
                let child = self.wrap(c);
                return Err(child.schema(format!("unexpected element <{}>", c.tag_name().name())));
            }
        }
        Ok(())
    }

    fn wrap(&self, node: roxmltree::Node<'a, 'i>) -> Elem<'a, 'i> {
        let mut path = format!("{}/{}", self.path, node.tag_name().name());
        if let Some(n) = node.attribute("name") {
            let _ = write!(path, "[{n}]");
        }
        Elem {
            node,
            doc: self.doc,
            file: self.file,
            path,
        }
    }

    pub fn children(&self) -> impl Iterator<Item = Elem<'a, 'i>> + '_ {
        self.node.children().filter(|c| c.is_element()).map(|c| self.wrap(c))
    }

    pub fn children_named<'s>(&'s self, name: &'s str) -> impl Iterator<Item = Elem<'a, 'i>> + 's {
        self.children().filter(move |c| c.name() == name)
    }

    pub fn child(&self, name: &str) -> Result<Option<Elem<'a, 'i>>, DataError> {
        let mut found = self.children_named(name);
        let first = found.next();
        if let Some(second) = found.next() {
            return Err(second.schema(format!("duplicate element <{name}>")));
        }
        Ok(first)
    }

    pub fn req_child(&self, name: &str) -> Result<Elem<'a, 'i>, DataError> {
        self.child(name)?
            .ok_or_else(|| self.schema(format!("missing element <{name}>")))
    }

    pub fn attr(&self, name: &str) -> Option<&'a str> {
        self.node.attribute(name)
    }

    pub fn req_attr(&self, name: &str) -> Result<&'a str, DataError> {
        self.attr(name)
            .ok_or_else(|| self.schema(format!("missing attribute '{name}'")))
    }

    pub fn parse_attr<T: FromStr>(&self, name: &str) -> Result<Option<T>, DataError> {
        match self.attr(name) {
            None => Ok(None),
            Some(raw) => raw
                .trim()
                .parse::<T>()
                .map(Some)
                .map_err(|_| self.schema(format!("attribute '{name}' has invalid value '{raw}'"))),
        }
    }

    pub fn req_parse_attr<T: FromStr>(&self, name: &str) -> Result<T, DataError> {
        self.parse_attr(name)?
            .ok_or_else(|| self.schema(format!("missing attribute '{name}'")))
    }

    pub fn bool_attr(&self, name: &str) -> Result<Option<bool>, DataError> {
        match self.attr(name) {
            None => Ok(None),
            Some(raw) => parse_bool(raw)
                .map(Some)
                .ok_or_else(|| self.schema(format!("attribute '{name}' must be true/false, got '{raw}'"))),
        }
    }

    pub fn text(&self) -> &'a str {
        self.node.text().unwrap_or("").trim()
    }

    pub fn parse_text<T: FromStr>(&self) -> Result<T, DataError> {
        let raw = self.text();
        raw.parse::<T>()
            .map_err(|_| self.schema(format!("invalid value '{raw}'")))
    }

    pub fn bool_text(&self) -> Result<bool, DataError> {
        let raw = self.text();
        parse_bool(raw).ok_or_else(|| self.schema(format!("expected true/false, got '{raw}'")))
    }

    pub fn numbers(&self, count: usize) -> Result<Vec<f64>, DataError> {
        let values = self
            .text()
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| self.schema(format!("invalid number '{t}'"))))
            .collect::<Result<Vec<_>, _>>()?;
        if values.len() != count {
            return Err(self.schema(format!("expected {count} numbers, found {}", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(self.semantic("non-finite number"));
        }
        Ok(values)
    }

    pub fn vector3(&self) -> Result<Vector3<f64>, DataError> {
        let v = self.numbers(3)?;
        Ok(Vector3::new(v[0], v[1], v[2]))
    }

    pub fn pose(&self) -> Result<Pose, DataError> {
        let v = self.numbers(16)?;
        let arr: [f64; 16] = v.try_into().expect("length checked");
        Pose::from_row_major(&arr).map_err(|e| self.semantic(format!("invalid pose: {e}")))
    }
}

fn parse_bool(raw: &str) -> Option<bool> {
    match raw.trim() {
        "true" | "1" => Some(true),
        "false" | "0" => Some(false),
        _ => None,
    }
}

/// Shortest round-tripping representation.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let s = format!("{v:?}");
    s.strip_suffix(".0").map(str::to_string).unwrap_or(s)
}

pub fn fmt_pose(p: &Pose) -> String {
    p.to_row_major().iter().map(|v| fmt_num(*v)).collect::<Vec<_>>().join(" ")
}

pub fn fmt_vec3(v: &Vector3<f64>) -> String {
    format!("{} {} {}", fmt_num(v.x), fmt_num(v.y), fmt_num(v.z))
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Minimal indenting writer; attribute order is the caller's order.
pub struct XmlWriter {
    out: String,
    depth: usize,
}

impl Default for XmlWriter {
    fn default() -> Self {
        Self::new()
    }
}

impl XmlWriter {
    pub fn new() -> Self {
        Self {
            out: String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"),
            depth: 0,
        }
    }

    fn start(&mut self, name: &str, attrs: &[(&str, String)]) {
        self.out.push_str(&"  ".repeat(self.depth));
        self.out.push('<');
        self.out.push_str(name);
        for (k, v) in attrs {
            let _ = write!(self.out, " {k}=\"{}\"", escape(v));
        }
    }

    pub fn open(&mut self, name: &str, attrs: &[(&str, String)]) {
        self.start(name, attrs);
        self.out.push_str(">\n");
        self.depth += 1;
    }

    pub fn close(&mut self, name: &str) {
        self.depth -= 1;
        self.out.push_str(&"  ".repeat(self.depth));
        let _ = writeln!(self.out, "</{name}>");
    }

    pub fn empty(&mut self, name: &str, attrs: &[(&str, String)]) {
        self.start(name, attrs);
        self.out.push_str("/>\n");
    }

    pub fn leaf(&mut self, name: &str, attrs: &[(&str, String)], text: &str) {
        self.start(name, attrs);
        let _ = writeln!(self.out, ">{}</{name}>", escape(text));
    }

    pub fn finish(self) -> String {
        self.out
    }
}
