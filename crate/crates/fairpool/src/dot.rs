//! Graphviz DOT emission for diagrams and pooling reports.

use std::collections::BTreeSet;

use crate::diagram::{CausalDiagram, VarKind};

fn quote(name: &str) -> String {
    format!("\"{}\"", name.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Renders a diagram as a `digraph`. The predictor is drawn as a double
/// circle, protected vertices are shaded, removed vertices (absent from
/// the diagram itself) appear dashed and disconnected.
pub fn diagram_to_dot(
    diagram: &CausalDiagram,
    predictor: Option<&str>,
    protected: &BTreeSet<String>,
    removed: &BTreeSet<String>,
) -> String {
    let mut out = String::from("digraph pooled {\n");
    out.push_str("  rankdir=LR;\n");
    for (name, kind) in diagram.vertices() {
        let mut attrs = Vec::new();
        if Some(name) == predictor {
            attrs.push("shape=doublecircle".to_string());
        } else if kind == VarKind::Exogenous {
            attrs.push("shape=plaintext".to_string());
        }
        if protected.contains(name) {
            attrs.push("style=filled".to_string());
            attrs.push("fillcolor=lightpink".to_string());
        }
        out.push_str(&format!("  {}", quote(name)));
        if !attrs.is_empty() {
            out.push_str(&format!(" [{}]", attrs.join(", ")));
        }
        out.push_str(";\n");
    }
    for name in removed {
        if diagram.contains_vertex(name) {
            continue;
        }
        let mut attrs = vec!["style=dashed".to_string(), "color=gray".to_string()];
        attrs.push(format!("label={}", quote(&format!("{name} (removed)"))));
        out.push_str(&format!("  {} [{}];\n", quote(name), attrs.join(", ")));
    }
    for e in diagram.edges() {
        out.push_str(&format!(
            "  {} -> {};\n",
            quote(e.source()),
            quote(e.target())
        ));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn dot_lists_every_vertex_and_edge() {
        let d = fixtures::alice();
        let dot = diagram_to_dot(&d, Some("Y"), &BTreeSet::new(), &BTreeSet::new());
        assert!(dot.starts_with("digraph"));
        assert!(dot.ends_with("}\n"));
        for (name, _) in d.vertices() {
            assert!(dot.contains(&quote(name)));
        }
        assert!(dot.contains("\"Gnd\" -> \"Job\";"));
        assert!(dot.contains("doublecircle"));
    }

    #[test]
    fn removed_vertices_are_dashed() {
        let d = fixtures::alice().without_vertices(&["Gnd".to_string()].into_iter().collect());
        let removed: BTreeSet<String> = ["Gnd".to_string()].into_iter().collect();
        let dot = diagram_to_dot(&d, Some("Y"), &removed, &removed);
        assert!(dot.contains("Gnd (removed)"));
        assert!(dot.contains("style=dashed"));
    }

    #[test]
    fn names_with_quotes_are_escaped() {
        let mut d = CausalDiagram::new();
        d.add_vertex("a\"b", VarKind::Endogenous);
        let dot = diagram_to_dot(&d, None, &BTreeSet::new(), &BTreeSet::new());
        assert!(dot.contains("\"a\\\"b\""));
    }
}
