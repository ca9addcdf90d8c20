//! Spring-embedder layout, interchange exports and static SVG maps.

mod export;
mod force;
mod svg;

pub use export::{export_graph, ExportFormat, ExportedGraph, InconsistentInputs, NodeRecord, ParseError};
pub use force::{layout, LayoutResult, JITTER};
pub use svg::{
    render_svg, EncodedDimension, LegendEntry, Shape, SizeRule, UnencodableCategory, VisualEncoding, PALETTE,
    SHAPES, UNKNOWN_FILL,
};
