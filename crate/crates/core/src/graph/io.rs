//! Edge-list text format.
//!
//! ```text
//! n m
//! u v
//! ...
//! ```
//!
//! The header gives the vertex count `n` and the number of edge lines `m`.
//! Each edge line holds two distinct vertex ids in `0..n` separated by
//! whitespace. Writers emit every undirected edge once as `u v` with `u < v`,
//! in ascending order, and end every line with `\n`. Readers accept either
//! orientation and skip blank lines; an edge may appear only once.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Graph, GraphError, VertexId};

pub fn write_edge_list_to<W: Write>(g: &Graph, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{} {}", g.vertex_count(), g.edge_count())?;
    for (u, v) in g.edges() {
        writeln!(w, "{u} {v}")?;
    }
    w.flush()
}

pub fn write_edge_list(g: &Graph, path: &Path) -> Result<(), GraphError> {
    let io = |source| GraphError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = File::create(path).map_err(io)?;
    write_edge_list_to(g, BufWriter::new(file)).map_err(io)
}

fn parse_pair(line: &str, line_no: usize) -> Result<(usize, usize), GraphError> {
    let bad = |message: String| GraphError::Format {
        line: line_no,
        message,
    };
    let mut it = line.split_whitespace();
    let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
        return Err(bad(format!("expected two integers, found '{line}'")));
    };
    let a = a
        .parse()
        .map_err(|_| bad(format!("'{a}' is not a non-negative integer")))?;
    let b = b
        .parse()
        .map_err(|_| bad(format!("'{b}' is not a non-negative integer")))?;
    Ok((a, b))
}

pub fn read_edge_list_from<R: Read>(r: R) -> Result<Graph, GraphError> {
    let mut lines = BufReader::new(r)
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l));
    let mut next_line = || -> Result<Option<(usize, String)>, GraphError> {
        for (no, line) in lines.by_ref() {
            let line = line.map_err(|source| GraphError::Io {
                path: "<input>".into(),
                source,
            })?;
            if !line.trim().is_empty() {
                return Ok(Some((no, line)));
            }
        }
        Ok(None)
    };
    let Some((no, header)) = next_line()? else {
        return Err(GraphError::Format {
            line: 1,
            message: "missing 'n m' header".into(),
        });
    };
    let (n, m) = parse_pair(&header, no)?;
    let mut edges = Vec::with_capacity(m);
    while let Some((no, line)) = next_line()? {
        let (u, v) = parse_pair(&line, no)?;
        if u >= n || v >= n || u == v {
            return Err(GraphError::Format {
                line: no,
                message: format!("invalid edge ({u}, {v}) for {n} vertices"),
            });
        }
        edges.push((u as VertexId, v as VertexId));
    }
    if edges.len() != m {
        return Err(GraphError::Format {
            line: no,
            message: format!("header declares {m} edges, found {}", edges.len()),
        });
    }
    let g = Graph::from_edges(n, edges)?;
    if g.edge_count() != m {
        return Err(GraphError::Format {
            line: no,
            message: format!("{} repeated edge(s)", m - g.edge_count()),
        });
    }
    Ok(g)
}

pub fn read_edge_list(path: &Path) -> Result<Graph, GraphError> {
    let file = File::open(path).map_err(|source| GraphError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_edge_list_from(file).map_err(|e| match e {
        GraphError::Io { source, .. } => GraphError::Io {
            path: path.display().to_string(),
            source,
        },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_in_memory() {
        let g = super::super::torus2d(4, 3).unwrap();
        let mut buf = Vec::new();
        write_edge_list_to(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("12 48\n"));
        assert_eq!(read_edge_list_from(buf.as_slice()).unwrap(), g);
    }

    #[test]
    fn rejects_bad_counts() {
        assert!(read_edge_list_from("3 2\n0 1\n".as_bytes()).is_err());
        assert!(read_edge_list_from("3 1\n0 5\n".as_bytes()).is_err());
    }
}
