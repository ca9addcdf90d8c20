//! GraphML, DOT and JSON documents for attributed, clustered, laid-out graphs.
//!
//! All three formats carry the same content: graph-level `ego` and
//! `home_country`, per-node `geography`, `affiliation`, `cluster`, `x`, `y`,
//! and directed edges. Nodes and edges are written in sorted id order, and
//! floats use shortest round-trip formatting, so output is byte-stable and
//! parses back to an equal [`ExportedGraph`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use quick_xml::escape::escape;
use quick_xml::events::Event;
use serde::{Deserialize, Serialize};

use super::force::LayoutResult;
use crate::analysis::Clustering;
use crate::attributes::{Affiliation, AttributedGraph, Geography};
use crate::ingest::AccountId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Graphml,
    Dot,
    Json,
}

impl ExportFormat {
    pub const ALL: [ExportFormat; 3] = [ExportFormat::Graphml, ExportFormat::Dot, ExportFormat::Json];

    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::Graphml => "graphml",
            ExportFormat::Dot => "dot",
            ExportFormat::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeRecord {
    pub geography: Geography,
    pub affiliation: Affiliation,
    pub cluster: usize,
    pub x: f64,
    pub y: f64,
}

/// Format-independent content of an exported graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportedGraph {
    pub ego: AccountId,
    pub home_country: String,
    pub nodes: BTreeMap<AccountId, NodeRecord>,
    pub edges: BTreeSet<(AccountId, AccountId)>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("inputs cover different node sets: {0}")]
pub struct InconsistentInputs(pub String);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse {format:?} document: {message}")]
pub struct ParseError {
    pub format: ExportFormat,
    pub message: String,
}

impl ExportedGraph {
    pub fn assemble(
        ag: &AttributedGraph,
        clustering: &Clustering,
        layout: &LayoutResult,
    ) -> Result<Self, InconsistentInputs> {
        let nodes = &ag.graph.nodes;
        let same = |keys: Vec<&AccountId>| keys.len() == nodes.len() && keys.iter().all(|k| nodes.contains(*k));
        if !same(clustering.assignment.keys().collect()) {
            return Err(InconsistentInputs("clustering".into()));
        }
        if !same(layout.positions.keys().collect()) {
            return Err(InconsistentInputs("layout".into()));
        }
        if !same(ag.coding.keys().collect()) {
            return Err(InconsistentInputs("coding".into()));
        }
        let nodes = nodes
            .iter()
            .map(|id| {
                let code = ag.coding_of(id);
                let (x, y) = layout.positions[id];
                (
                    id.clone(),
                    NodeRecord {
                        geography: code.geography,
                        affiliation: code.affiliation,
                        cluster: clustering.assignment[id],
                        x,
                        y,
                    },
                )
            })
            .collect();
        Ok(ExportedGraph {
            ego: ag.graph.ego.clone(),
            home_country: ag.home_country.clone(),
            nodes,
            edges: ag.graph.edges.clone(),
        })
    }

    pub fn render(&self, format: ExportFormat) -> String {
        match format {
            ExportFormat::Graphml => self.to_graphml(),
            ExportFormat::Dot => self.to_dot(),
            ExportFormat::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("serializable");
                s.push('\n');
                s
            }
        }
    }

    pub fn parse(format: ExportFormat, text: &str) -> Result<Self, ParseError> {
        let fail = |message: String| ParseError { format, message };
        match format {
            ExportFormat::Json => serde_json::from_str(text).map_err(|e| fail(e.to_string())),
            ExportFormat::Graphml => parse_graphml(text).map_err(fail),
            ExportFormat::Dot => parse_dot(text).map_err(fail),
        }
    }

    fn to_graphml(&self) -> String {
        let mut s = String::new();
        s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        s.push_str(
            "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\" \
             xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\" \
             xsi:schemaLocation=\"http://graphml.graphdrawing.org/xmlns \
             http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd\">\n",
        );
        for (id, target, ty) in [
            ("ego", "graph", "string"),
            ("home_country", "graph", "string"),
            ("geography", "node", "string"),
            ("affiliation", "node", "string"),
            ("cluster", "node", "int"),
            ("x", "node", "double"),
            ("y", "node", "double"),
        ] {
            let _ = writeln!(
                s,
                "  <key id=\"{id}\" for=\"{target}\" attr.name=\"{id}\" attr.type=\"{ty}\"/>"
            );
        }
        s.push_str("  <graph id=\"interaction_community\" edgedefault=\"directed\">\n");
        let _ = writeln!(s, "    <data key=\"ego\">{}</data>", escape(self.ego.as_str()));
        let _ = writeln!(s, "    <data key=\"home_country\">{}</data>", escape(self.home_country.as_str()));
        for (id, n) in &self.nodes {
            let _ = writeln!(s, "    <node id=\"{}\">", escape(id.as_str()));
            let _ = writeln!(s, "      <data key=\"geography\">{}</data>", n.geography);
            let _ = writeln!(s, "      <data key=\"affiliation\">{}</data>", n.affiliation);
            let _ = writeln!(s, "      <data key=\"cluster\">{}</data>", n.cluster);
            let _ = writeln!(s, "      <data key=\"x\">{}</data>", n.x);
            let _ = writeln!(s, "      <data key=\"y\">{}</data>", n.y);
            s.push_str("    </node>\n");
        }
        for (i, (u, v)) in self.edges.iter().enumerate() {
            let _ = writeln!(
                s,
                "    <edge id=\"e{i}\" source=\"{}\" target=\"{}\"/>",
                escape(u.as_str()),
                escape(v.as_str())
            );
        }
        s.push_str("  </graph>\n</graphml>\n");
        s
    }

    fn to_dot(&self) -> String {
        let mut s = String::new();
        s.push_str("digraph \"interaction_community\" {\n");
        let _ = writeln!(
            s,
            "  graph [ego={}, home_country={}];",
            dot_quote(self.ego.as_str()),
            dot_quote(&self.home_country)
        );
        for (id, n) in &self.nodes {
            let _ = writeln!(
                s,
                "  {} [geography=\"{}\", affiliation=\"{}\", cluster={}, x={}, y={}];",
                dot_quote(id.as_str()),
                n.geography,
                n.affiliation,
                n.cluster,
                n.x,
                n.y
            );
        }
        for (u, v) in &self.edges {
            let _ = writeln!(s, "  {} -> {};", dot_quote(u.as_str()), dot_quote(v.as_str()));
        }
        s.push_str("}\n");
        s
    }
}

pub fn export_graph(
    ag: &AttributedGraph,
    clustering: &Clustering,
    layout: &LayoutResult,
    format: ExportFormat,
) -> Result<String, InconsistentInputs> {
    Ok(ExportedGraph::assemble(ag, clustering, layout)?.render(format))
}

fn dot_quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

#[derive(Default)]
struct PartialNode {
    geography: Option<Geography>,
    affiliation: Option<Affiliation>,
    cluster: Option<usize>,
    x: Option<f64>,
    y: Option<f64>,
}

impl PartialNode {
    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let bad = |what: &str| format!("bad {what} value {value:?}");
        match key {
            "geography" => self.geography = Some(value.parse().map_err(|_| bad(key))?),
            "affiliation" => self.affiliation = Some(value.parse().map_err(|_| bad(key))?),
            "cluster" => self.cluster = Some(value.parse().map_err(|_| bad(key))?),
            "x" => self.x = Some(value.parse().map_err(|_| bad(key))?),
            "y" => self.y = Some(value.parse().map_err(|_| bad(key))?),
            other => return Err(format!("unknown node attribute {other:?}")),
        }
        Ok(())
    }

    fn finish(self, id: &str) -> Result<NodeRecord, String> {
        let missing = |k: &str| format!("node {id:?} lacks {k}");
        Ok(NodeRecord {
            geography: self.geography.ok_or_else(|| missing("geography"))?,
            affiliation: self.affiliation.ok_or_else(|| missing("affiliation"))?,
            cluster: self.cluster.ok_or_else(|| missing("cluster"))?,
            x: self.x.ok_or_else(|| missing("x"))?,
            y: self.y.ok_or_else(|| missing("y"))?,
        })
    }
}

struct Builder {
    ego: Option<String>,
    home_country: Option<String>,
    nodes: BTreeMap<AccountId, NodeRecord>,
    edges: BTreeSet<(AccountId, AccountId)>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            ego: None,
            home_country: None,
            nodes: BTreeMap::new(),
            edges: BTreeSet::new(),
        }
    }

    fn id(s: &str) -> Result<AccountId, String> {
        AccountId::new(s).map_err(|_| "empty node id".to_string())
    }

    fn node(&mut self, id: &str, partial: PartialNode) -> Result<(), String> {
        let record = partial.finish(id)?;
        if self.nodes.insert(Self::id(id)?, record).is_some() {
            return Err(format!("duplicate node {id:?}"));
        }
        Ok(())
    }

    fn edge(&mut self, u: &str, v: &str) -> Result<(), String> {
        self.edges.insert((Self::id(u)?, Self::id(v)?));
        Ok(())
    }

    fn finish(self) -> Result<ExportedGraph, String> {
        for (u, v) in &self.edges {
            if !self.nodes.contains_key(u) || !self.nodes.contains_key(v) {
                return Err(format!("edge {u} -> {v} references an undeclared node"));
            }
        }
        Ok(ExportedGraph {
            ego: Self::id(&self.ego.ok_or("missing ego")?)?,
            home_country: self.home_country.ok_or("missing home_country")?,
            nodes: self.nodes,
            edges: self.edges,
        })
    }
}

fn parse_graphml(text: &str) -> Result<ExportedGraph, String> {
    let mut reader = quick_xml::Reader::from_str(text);
    let mut b = Builder::new();
    let mut current: Option<(String, PartialNode)> = None;
    let mut data_key: Option<String> = None;
    let mut data_text = String::new();

    let attr = |e: &quick_xml::events::BytesStart, name: &[u8]| -> Result<Option<String>, String> {
        for a in e.attributes() {
            let a = a.map_err(|e| e.to_string())?;
            if a.key.as_ref() == name {
                return Ok(Some(a.unescape_value().map_err(|e| e.to_string())?.into_owned()));
            }
        }
        Ok(None)
    };

    loop {
        match reader.read_event().map_err(|e| e.to_string())? {
            Event::Start(e) | Event::Empty(e) if e.name().as_ref() == b"node" => {
                let id = attr(&e, b"id")?.ok_or("node without id")?;
                current = Some((id, PartialNode::default()));
            }
            Event::Start(e) if e.name().as_ref() == b"data" => {
                data_key = Some(attr(&e, b"key")?.ok_or("data without key")?);
                data_text.clear();
            }
            Event::Empty(e) if e.name().as_ref() == b"data" => {
                let key = attr(&e, b"key")?.ok_or("data without key")?;
                apply_data(&mut b, &mut current, &key, "")?;
            }
            Event::Start(e) | Event::Empty(e) if e.name().as_ref() == b"edge" => {
                let u = attr(&e, b"source")?.ok_or("edge without source")?;
                let v = attr(&e, b"target")?.ok_or("edge without target")?;
                b.edge(&u, &v)?;
            }
            Event::Text(t) if data_key.is_some() => {
                data_text.push_str(&t.unescape().map_err(|e| e.to_string())?);
            }
            Event::End(e) if e.name().as_ref() == b"data" => {
                let key = data_key.take().ok_or("unbalanced data element")?;
                apply_data(&mut b, &mut current, &key, &data_text)?;
            }
            Event::End(e) if e.name().as_ref() == b"node" => {
                let (id, partial) = current.take().ok_or("unbalanced node element")?;
                b.node(&id, partial)?;
            }
            Event::Eof => break,
            _ => {}
        }
    }
    b.finish()
}

fn apply_data(
    b: &mut Builder,
    current: &mut Option<(String, PartialNode)>,
    key: &str,
    value: &str,
) -> Result<(), String> {
    match current {
        Some((_, node)) => node.set(key, value),
        None => {
            match key {
                "ego" => b.ego = Some(value.to_string()),
                "home_country" => b.home_country = Some(value.to_string()),
                other => return Err(format!("unknown graph attribute {other:?}")),
            }
            Ok(())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Quoted(String),
    Punct(char),
    Arrow,
}

fn tokenize_dot(text: &str) -> Result<Vec<Tok>, String> {
    let mut toks = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '"' {
            chars.next();
            let mut s = String::new();
            loop {
                match chars.next() {
                    None => return Err("unterminated string".into()),
                    Some('"') => break,
                    Some('\\') => match chars.next() {
                        Some('n') => s.push('\n'),
                        Some(e) => s.push(e),
                        None => return Err("dangling escape".into()),
                    },
                    Some(ch) => s.push(ch),
                }
            }
            toks.push(Tok::Quoted(s));
        } else if c == '-' && {
            let mut look = chars.clone();
            look.next();
            look.peek() == Some(&'>')
        } {
            chars.next();
            chars.next();
            toks.push(Tok::Arrow);
        } else if "{}[]=,;".contains(c) {
            chars.next();
            toks.push(Tok::Punct(c));
        } else {
            let mut s = String::new();
            while let Some(&ch) = chars.peek() {
                if ch.is_alphanumeric() || "_.-+".contains(ch) {
                    s.push(ch);
                    chars.next();
                } else {
                    break;
                }
            }
            if s.is_empty() {
                return Err(format!("unexpected character {c:?}"));
            }
            toks.push(Tok::Word(s));
        }
    }
    Ok(toks)
}

fn parse_dot(text: &str) -> Result<ExportedGraph, String> {
    let toks = tokenize_dot(text)?;
    let mut it = toks.into_iter().peekable();
    let text_of = |t: Option<Tok>| match t {
        Some(Tok::Word(s)) | Some(Tok::Quoted(s)) => Ok(s),
        other => Err(format!("expected identifier, found {other:?}")),
    };
    match it.next() {
        Some(Tok::Word(w)) if w == "digraph" => {}
        other => return Err(format!("expected `digraph`, found {other:?}")),
    }
    if !matches!(it.peek(), Some(Tok::Punct('{'))) {
        text_of(it.next())?;
    }
    if it.next() != Some(Tok::Punct('{')) {
        return Err("expected `{`".into());
    }

    let mut b = Builder::new();
    loop {
        let head = match it.next() {
            Some(Tok::Punct('}')) => break,
            Some(Tok::Punct(';')) => continue,
            t => text_of(t)?,
        };
        match it.peek() {
            Some(Tok::Arrow) => {
                it.next();
                let target = text_of(it.next())?;
                b.edge(&head, &target)?;
            }
            _ => {
                let mut attrs = Vec::new();
                if it.peek() == Some(&Tok::Punct('[')) {
                    it.next();
                    loop {
                        match it.next() {
                            Some(Tok::Punct(']')) => break,
                            Some(Tok::Punct(',')) | Some(Tok::Punct(';')) => continue,
                            t => {
                                let k = text_of(t)?;
                                if it.next() != Some(Tok::Punct('=')) {
                                    return Err(format!("expected `=` after {k:?}"));
                                }
                                attrs.push((k, text_of(it.next())?));
                            }
                        }
                    }
                }
                if head == "graph" {
                    for (k, v) in attrs {
                        match k.as_str() {
                            "ego" => b.ego = Some(v),
                            "home_country" => b.home_country = Some(v),
                            other => return Err(format!("unknown graph attribute {other:?}")),
                        }
                    }
                } else {
                    let mut node = PartialNode::default();
                    for (k, v) in attrs {
                        node.set(&k, &v)?;
                    }
                    b.node(&head, node)?;
                }
            }
        }
    }
    b.finish()
}
