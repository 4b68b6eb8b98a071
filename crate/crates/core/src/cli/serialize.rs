use std::fmt::Write;

use crate::error::Result;
use crate::reeb::ReebGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    Json,
    GraphMl,
    Dot,
}

/// Serialize a validated graph. Invalid graphs (for example an edge with no
/// members) are refused with a contract error.
pub fn serialize_graph(r: &ReebGraph, format: GraphFormat) -> Result<Vec<u8>> {
    r.validate()?;
    let text = match format {
        GraphFormat::Json => {
            let mut s = r.to_json()?;
            s.push('\n');
            s
        }
        GraphFormat::GraphMl => graphml(r),
        GraphFormat::Dot => dot(r),
    };
    Ok(text.into_bytes())
}

fn join(ids: &[u32]) -> String {
    ids.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn graphml(r: &ReebGraph) -> String {
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    let keys = [
        ("epsilon", "graph", "double"),
        ("step", "node", "long"),
        ("kind", "node", "string"),
        ("x", "node", "double"),
        ("y", "node", "double"),
        ("z", "node", "double"),
        ("witness", "node", "long"),
        ("members", "edge", "string"),
        ("interval", "edge", "string"),
    ];
    for (id, domain, ty) in keys {
        let _ = writeln!(
            s,
            "  <key id=\"{id}\" for=\"{domain}\" attr.name=\"{id}\" attr.type=\"{ty}\"/>"
        );
    }
    for k in r.metadata.keys() {
        let k = escape_xml(k);
        let _ = writeln!(
            s,
            "  <key id=\"meta_{k}\" for=\"graph\" attr.name=\"{k}\" attr.type=\"string\"/>"
        );
    }
    s.push_str("  <graph id=\"reeb\" edgedefault=\"directed\">\n");
    let _ = writeln!(s, "    <data key=\"epsilon\">{:?}</data>", r.epsilon);
    for (k, v) in &r.metadata {
        let _ = writeln!(
            s,
            "    <data key=\"meta_{}\">{}</data>",
            escape_xml(k),
            escape_xml(v)
        );
    }
    for v in &r.vertices {
        let p = v.location;
        let _ = writeln!(
            s,
            "    <node id=\"v{}\"><data key=\"step\">{}</data><data key=\"kind\">{}</data>\
             <data key=\"x\">{:?}</data><data key=\"y\">{:?}</data><data key=\"z\">{:?}</data>\
             <data key=\"witness\">{}</data></node>",
            v.id.0, v.step, v.kind, p.x, p.y, p.z, v.witness
        );
    }
    for (i, e) in r.edges.iter().enumerate() {
        let _ = writeln!(
            s,
            "    <edge id=\"e{i}\" source=\"v{}\" target=\"v{}\"><data key=\"members\">{}</data>\
             <data key=\"interval\">{},{}</data></edge>",
            e.u.0,
            e.v.0,
            join(&e.members),
            e.interval[0],
            e.interval[1]
        );
    }
    s.push_str("  </graph>\n</graphml>\n");
    s
}

fn dot(r: &ReebGraph) -> String {
    let mut s = String::from("digraph reeb {\n");
    let _ = writeln!(s, "  graph [epsilon=\"{:?}\"];", r.epsilon);
    for v in &r.vertices {
        let p = v.location;
        let _ = writeln!(
            s,
            "  v{} [step=\"{}\", kind=\"{}\", x=\"{:?}\", y=\"{:?}\", z=\"{:?}\", witness=\"{}\"];",
            v.id.0, v.step, v.kind, p.x, p.y, p.z, v.witness
        );
    }
    for e in &r.edges {
        let _ = writeln!(
            s,
            "  v{} -> v{} [members=\"{}\", interval=\"{},{}\"];",
            e.u.0,
            e.v.0,
            join(&e.members),
            e.interval[0],
            e.interval[1]
        );
    }
    s.push_str("}\n");
    s
}
