//! Static SVG maps with an embedded legend.
//!
//! Edges are drawn from the `any` symmetrization of the directed graph. Glyph
//! colour and optional shape each encode one dimension; the legend lists every
//! category present in the graph and nothing else. Coordinates are printed
//! with two decimals so output bytes depend only on the inputs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use quick_xml::escape::escape;
use serde::{Deserialize, Serialize};

use super::force::LayoutResult;
use crate::analysis::Clustering;
use crate::attributes::{Affiliation, AttributedGraph, Coding, Geography};
use crate::egonet::{symmetrize, SymmetrizationMode};
use crate::ingest::AccountId;

/// Colour-blind-safe qualitative palette.
pub const PALETTE: [&str; 8] = [
    "#0072b2", "#e69f00", "#009e73", "#cc79a7", "#56b4e9", "#d55e00", "#f0e442", "#000000",
];
/// Fill reserved for the `unknown` category in either dimension.
pub const UNKNOWN_FILL: &str = "#bbbbbb";
pub const SHAPES: [Shape; 6] = [
    Shape::Circle,
    Shape::Square,
    Shape::TriangleUp,
    Shape::Diamond,
    Shape::TriangleDown,
    Shape::Hexagon,
];

const MAP_SIZE: f64 = 600.0;
const MARGIN: f64 = 20.0;
const LEGEND_X: f64 = MAP_SIZE + 2.0 * MARGIN;
const LEGEND_WIDTH: f64 = 220.0;
const LEGEND_ROW: f64 = 18.0;
const BASE_RADIUS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodedDimension {
    Geography,
    Affiliation,
    Cluster,
}

impl EncodedDimension {
    pub fn as_str(self) -> &'static str {
        match self {
            EncodedDimension::Geography => "geography",
            EncodedDimension::Affiliation => "affiliation",
            EncodedDimension::Cluster => "cluster",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeRule {
    #[default]
    Uniform,
    /// Radius grows with the square root of the undirected degree.
    Degree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shape {
    Circle,
    Square,
    TriangleUp,
    Diamond,
    TriangleDown,
    Hexagon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VisualEncoding {
    pub color_by: EncodedDimension,
    pub shape_by: Option<EncodedDimension>,
    pub size: SizeRule,
}

impl Default for VisualEncoding {
    fn default() -> Self {
        VisualEncoding {
            color_by: EncodedDimension::Affiliation,
            shape_by: Some(EncodedDimension::Geography),
            size: SizeRule::Uniform,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{dimension} category {category:?} has no {channel} available ({available} in use)")]
pub struct UnencodableCategory {
    pub dimension: &'static str,
    pub category: String,
    pub channel: &'static str,
    pub available: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LegendEntry {
    pub dimension: EncodedDimension,
    pub category: String,
    pub color: Option<&'static str>,
    pub shape: Option<Shape>,
}

/// Category of `coding`/`cluster` along `dim`, with its rank in canonical order.
fn category(dim: EncodedDimension, coding: Coding, cluster: usize) -> (usize, String) {
    match dim {
        EncodedDimension::Geography => (
            Geography::ALL.iter().position(|g| *g == coding.geography).unwrap(),
            coding.geography.token().to_string(),
        ),
        EncodedDimension::Affiliation => (
            Affiliation::ALL.iter().position(|a| *a == coding.affiliation).unwrap(),
            coding.affiliation.token().to_string(),
        ),
        EncodedDimension::Cluster => (cluster, format!("cluster {cluster}")),
    }
}

fn is_unknown(dim: EncodedDimension, name: &str) -> bool {
    dim != EncodedDimension::Cluster && name == "unknown"
}

/// Present categories in canonical order, each mapped to a channel slot.
fn assign_slots(
    dim: EncodedDimension,
    present: &BTreeSet<(usize, String)>,
    capacity: usize,
    channel: &'static str,
    reserve_unknown: bool,
) -> Result<BTreeMap<String, Option<usize>>, UnencodableCategory> {
    let mut out = BTreeMap::new();
    let mut next = 0;
    for (_, name) in present {
        if reserve_unknown && is_unknown(dim, name) {
            out.insert(name.clone(), None);
            continue;
        }
        if next >= capacity {
            return Err(UnencodableCategory {
                dimension: dim.as_str(),
                category: name.clone(),
                channel,
                available: capacity,
            });
        }
        out.insert(name.clone(), Some(next));
        next += 1;
    }
    Ok(out)
}

fn glyph(s: &mut String, shape: Shape, x: f64, y: f64, r: f64, fill: &str, id: Option<&str>) {
    let attrs = match id {
        Some(id) => format!("class=\"node\" data-id=\"{}\"", escape(id)),
        None => "class=\"swatch\"".to_string(),
    };
    let poly = |pts: &[(f64, f64)]| {
        pts.iter()
            .map(|(dx, dy)| format!("{:.2},{:.2}", x + dx * r, y + dy * r))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let _ = match shape {
        Shape::Circle => writeln!(
            s,
            "  <circle {attrs} cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{r:.2}\" fill=\"{fill}\"/>"
        ),
        Shape::Square => writeln!(
            s,
            "  <rect {attrs} x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{fill}\"/>",
            x - r * 0.9,
            y - r * 0.9,
            r * 1.8,
            r * 1.8
        ),
        other => {
            let h = 3f64.sqrt() / 2.0;
            let pts: &[(f64, f64)] = match other {
                Shape::TriangleUp => &[(0.0, -1.2), (1.1, 0.8), (-1.1, 0.8)],
                Shape::TriangleDown => &[(0.0, 1.2), (1.1, -0.8), (-1.1, -0.8)],
                Shape::Diamond => &[(0.0, -1.2), (1.2, 0.0), (0.0, 1.2), (-1.2, 0.0)],
                _ => &[(1.0, 0.0), (0.5, h), (-0.5, h), (-1.0, 0.0), (-0.5, -h), (0.5, -h)],
            };
            writeln!(
                s,
                "  <polygon {attrs} points=\"{}\" fill=\"{fill}\"/>",
                poly(pts)
            )
        }
    };
}

pub fn render_svg(
    layout: &LayoutResult,
    ag: &AttributedGraph,
    clustering: &Clustering,
    encoding: &VisualEncoding,
) -> Result<String, UnencodableCategory> {
    let nodes: Vec<&AccountId> = ag.graph.nodes.iter().collect();
    let cluster_of = |id: &AccountId| clustering.assignment.get(id).copied().unwrap_or(0);
    let cat = |dim, id: &AccountId| category(dim, ag.coding_of(id), cluster_of(id));

    let present = |dim| nodes.iter().map(|id| cat(dim, id)).collect::<BTreeSet<_>>();
    let color_present = present(encoding.color_by);
    let colors = assign_slots(encoding.color_by, &color_present, PALETTE.len(), "colour", true)?;
    let shape_present = encoding.shape_by.map(present);
    let shapes = match (encoding.shape_by, &shape_present) {
        (Some(dim), Some(p)) => Some(assign_slots(dim, p, SHAPES.len(), "shape", false)?),
        _ => None,
    };

    let undirected = symmetrize(&ag.graph, SymmetrizationMode::Any);
    let mut degree: BTreeMap<&AccountId, usize> = BTreeMap::new();
    for (u, v) in &undirected.edges {
        *degree.entry(u).or_default() += 1;
        *degree.entry(v).or_default() += 1;
    }
    let screen = |id: &AccountId| {
        let (x, y) = layout.positions.get(id).copied().unwrap_or((0.5, 0.5));
        (MARGIN + x * MAP_SIZE, MARGIN + (1.0 - y) * MAP_SIZE)
    };

    let mut legend: Vec<LegendEntry> = color_present
        .iter()
        .map(|(_, name)| LegendEntry {
            dimension: encoding.color_by,
            category: name.clone(),
            color: Some(colors[name].map_or(UNKNOWN_FILL, |i| PALETTE[i])),
            shape: None,
        })
        .collect();
    if let (Some(dim), Some(p), Some(sh)) = (encoding.shape_by, &shape_present, &shapes) {
        legend.extend(p.iter().map(|(_, name)| LegendEntry {
            dimension: dim,
            category: name.clone(),
            color: None,
            shape: Some(SHAPES[sh[name].expect("shape slots are never reserved")]),
        }));
    }

    let height = (MAP_SIZE + 2.0 * MARGIN).max(2.0 * MARGIN + LEGEND_ROW * (legend.len() + 2) as f64);
    let width = LEGEND_X + LEGEND_WIDTH;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\">"
    );
    let _ = writeln!(s, "  <rect x=\"0\" y=\"0\" width=\"{width:.0}\" height=\"{height:.0}\" fill=\"#ffffff\"/>");
    let _ = writeln!(
        s,
        "  <title>Interaction community of {} ({} nodes, {} edges)</title>",
        escape(ag.graph.ego.as_str()),
        nodes.len(),
        undirected.edges.len()
    );
    s.push_str("  <g class=\"edges\" stroke=\"#999999\" stroke-opacity=\"0.5\" stroke-width=\"0.6\">\n");
    for (u, v) in &undirected.edges {
        let (a, b) = (screen(u), screen(v));
        let _ = writeln!(
            s,
            "  <line class=\"edge\" x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\"/>",
            a.0, a.1, b.0, b.1
        );
    }
    s.push_str("  </g>\n  <g class=\"nodes\" stroke=\"#333333\" stroke-width=\"0.5\">\n");
    for id in &nodes {
        let (x, y) = screen(id);
        let (_, cname) = cat(encoding.color_by, id);
        let fill = colors[&cname].map_or(UNKNOWN_FILL, |i| PALETTE[i]);
        let shape = match (encoding.shape_by, &shapes) {
            (Some(dim), Some(sh)) => SHAPES[sh[&cat(dim, id).1].unwrap()],
            _ => Shape::Circle,
        };
        let r = match encoding.size {
            SizeRule::Uniform => BASE_RADIUS,
            SizeRule::Degree => BASE_RADIUS * (1.0 + (degree.get(id).copied().unwrap_or(0) as f64).sqrt() / 2.0),
        };
        glyph(&mut s, shape, x, y, r, fill, Some(id.as_str()));
    }
    s.push_str("  </g>\n  <g class=\"legend\" font-family=\"sans-serif\" font-size=\"12\" stroke=\"#333333\" stroke-width=\"0.5\">\n");
    let mut row_y = MARGIN + LEGEND_ROW;
    let mut last_dim = None;
    for entry in &legend {
        if last_dim != Some(entry.dimension) {
            let _ = writeln!(
                s,
                "  <text class=\"legend-title\" x=\"{LEGEND_X:.2}\" y=\"{row_y:.2}\" stroke=\"none\" font-weight=\"bold\">{}</text>",
                entry.dimension.as_str()
            );
            row_y += LEGEND_ROW;
            last_dim = Some(entry.dimension);
        }
        let _ = writeln!(
            s,
            "  <g class=\"legend-entry\" data-dimension=\"{}\" data-category=\"{}\">",
            entry.dimension.as_str(),
            escape(entry.category.as_str())
        );
        let fill = entry.color.unwrap_or("#ffffff");
        glyph(
            &mut s,
            entry.shape.unwrap_or(Shape::Circle),
            LEGEND_X + BASE_RADIUS,
            row_y - BASE_RADIUS,
            BASE_RADIUS,
            fill,
            None,
        );
        let _ = writeln!(
            s,
            "  <text x=\"{:.2}\" y=\"{row_y:.2}\" stroke=\"none\">{}</text>\n  </g>",
            LEGEND_X + 4.0 * BASE_RADIUS,
            escape(entry.category.as_str())
        );
        row_y += LEGEND_ROW;
    }
    s.push_str("  </g>\n</svg>\n");
    Ok(s)
}
