//! Graph inputs: edge-list files and the named builders `complete:<n>` and
//! `regular:<n>:<d>:<seed>`.

use std::path::Path;

use raq_prep_core::hamiltonian::Graph;
use raq_prep_core::random::{random_regular_graph, RngStream};

use crate::error::{CliError, CliResult};

/// Parse an edge list: one `u v [weight]` per line, 0-indexed. Blank lines
/// and `#` comments are skipped. The vertex count is one past the largest
/// index unless `n_vertices` is given.
pub fn parse_edge_list(text: &str, n_vertices: Option<usize>) -> CliResult<Graph> {
    let mut edges = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |what: &str| CliError::Config(format!("edge list line {}: {what}: {raw:?}", lineno + 1));
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(bad("expected `u v [weight]`"));
        }
        let u: usize = fields[0].parse().map_err(|_| bad("bad vertex"))?;
        let v: usize = fields[1].parse().map_err(|_| bad("bad vertex"))?;
        let w: f64 = match fields.get(2) {
            Some(s) => s.parse().map_err(|_| bad("bad weight"))?,
            None => 1.0,
        };
        edges.push((u, v, w));
    }
    let n = n_vertices.unwrap_or_else(|| edges.iter().map(|&(u, v, _)| u.max(v) + 1).max().unwrap_or(0));
    Graph::new(n, edges).map_err(CliError::from_graph)
}

impl CliError {
    fn from_graph(e: raq_prep_core::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

/// Resolve a graph spec. Anything that is not a named builder is read as an
/// edge-list path, relative to `base_dir` when given.
pub fn resolve_graph(spec: &str, base_dir: Option<&Path>) -> CliResult<Graph> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str, what: &str| -> CliResult<u64> {
        s.parse().map_err(|_| CliError::Config(format!("graph spec {spec:?}: bad {what} {s:?}")))
    };
    match parts.as_slice() {
        ["complete", n] => Graph::complete(num(n, "vertex count")? as usize).map_err(CliError::from_graph),
        ["regular", n, d, seed] => {
            let (n, d, seed) = (num(n, "vertex count")? as usize, num(d, "degree")? as usize, num(seed, "seed")?);
            random_regular_graph(n, d, &mut RngStream::new(seed, 0)).map_err(CliError::from_graph)
        }
        ["complete", ..] | ["regular", ..] => Err(CliError::Config(format!(
            "graph spec {spec:?}: expected complete:<n> or regular:<n>:<d>:<seed>"
        ))),
        _ => {
            let path = match base_dir {
                Some(dir) => dir.join(spec),
                None => Path::new(spec).to_path_buf(),
            };
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::Config(format!("cannot read edge list {}: {e}", path.display())))?;
            parse_edge_list(&text, None)
        }
    }
}

/// Substitute `{n}` in a templated spec such as `complete:{n}`.
pub fn instantiate(spec: &str, n: usize) -> String {
    spec.replace("{n}", &n.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_builders() {
        let k4 = resolve_graph("complete:4", None).unwrap();
        assert_eq!(k4.edges().len(), 6);
        let r = resolve_graph("regular:8:3:1", None).unwrap();
        assert_eq!(r.edges().len(), 12);
        assert!((0..8).all(|v| r.degree(v) == 3));
        assert_eq!(r, resolve_graph("regular:8:3:1", None).unwrap());
        assert!(matches!(resolve_graph("regular:5:3:1", None), Err(CliError::Config(_))));
        assert!(matches!(resolve_graph("complete:x", None), Err(CliError::Config(_))));
        assert_eq!(instantiate("complete:{n}", 5), "complete:5");
    }

    #[test]
    fn edge_lists() {
        let g = parse_edge_list("# triangle\n0 1\n1 2 0.5\n\n2 0\n", None).unwrap();
        assert_eq!(g.n_vertices(), 3);
        assert_eq!(g.edges().len(), 3);
        assert!(parse_edge_list("0 0\n", None).is_err());
        assert!(parse_edge_list("0 1\n1 0\n", None).is_err());
        assert!(parse_edge_list("0 x\n", None).is_err());
        assert!(parse_edge_list("0 1 2 3\n", None).is_err());
    }
}
