//! `mesh2d v1` plain-text format.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{Cell, Mesh};
use crate::error::{Error, Result};

const HEADER: &str = "mesh2d v1";

pub fn write_mesh(mesh: &Mesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{HEADER}");
    let _ = writeln!(s, "nodes {}", mesh.nodes.len());
    for (i, p) in mesh.nodes.iter().enumerate() {
        let _ = writeln!(s, "{i} {} {}", p[0], p[1]);
    }
    let _ = writeln!(s, "elements {}", mesh.cells.len());
    for (i, c) in mesh.cells.iter().enumerate() {
        let _ = write!(s, "{i} {}", c.kind().name());
        for n in c.nodes() {
            let _ = write!(s, " {n}");
        }
        s.push('\n');
    }
    for (name, ids) in &mesh.node_sets {
        let _ = writeln!(s, "nodeset {name} {}", ids.len());
        for id in ids {
            let _ = writeln!(s, "{id}");
        }
    }
    for (name, edges) in &mesh.edge_sets {
        let _ = writeln!(s, "edgeset {name} {}", edges.len());
        for e in edges {
            let _ = writeln!(s, "{} {}", e[0], e[1]);
        }
    }
    for (name, ids) in &mesh.cell_sets {
        let _ = writeln!(s, "elemset {name} {}", ids.len());
        for id in ids {
            let _ = writeln!(s, "{id}");
        }
    }
    s
}

pub fn save_mesh(mesh: &Mesh, path: &Path) -> Result<()> {
    std::fs::write(path, write_mesh(mesh)).map_err(|e| Error::io(path, e))
}

/// Reads and validates a mesh file.
pub fn load_mesh(path: &Path) -> Result<Mesh> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mesh = parse_mesh(&text, path)?;
    mesh.validate().map_err(|e| match e {
        Error::Mesh(m) => Error::Mesh(format!("{}: {m}", path.display())),
        other => other,
    })?;
    Ok(mesh)
}

struct Lines<'a> {
    path: &'a Path,
    inner: Vec<(usize, Vec<&'a str>)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str, path: &'a Path) -> Self {
        let inner = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split_whitespace().collect::<Vec<_>>()))
            .filter(|(_, t)| !t.is_empty() && !t[0].starts_with('#'))
            .collect();
        Self { path, inner, pos: 0 }
    }

    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    fn next(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        let last = self.inner.last().map_or(0, |l| l.0);
        let item = self
            .inner
            .get(self.pos)
            .cloned()
            .ok_or_else(|| self.err(last + 1, format!("unexpected end of file, expected {what}")))?;
        self.pos += 1;
        Ok(item)
    }

    fn done(&self) -> bool {
        self.pos >= self.inner.len()
    }

    fn num<T: std::str::FromStr>(&self, line: usize, tok: &str, what: &str) -> Result<T> {
        tok.parse().map_err(|_| self.err(line, format!("invalid {what} `{tok}`")))
    }

    fn count(&mut self, keyword: &str) -> Result<usize> {
        let (line, t) = self.next(keyword)?;
        if t.len() != 2 || t[0] != keyword {
            return Err(self.err(line, format!("expected `{keyword} <count>`")));
        }
        self.num(line, t[1], "count")
    }
}

pub fn parse_mesh(text: &str, path: &Path) -> Result<Mesh> {
    let mut lines = Lines::new(text, path);
    let (line, head) = lines.next("header")?;
    if head.join(" ") != HEADER {
        return Err(lines.err(line, format!("expected header `{HEADER}`")));
    }
    let mut mesh = Mesh::default();

    let n = lines.count("nodes")?;
    let mut node_ids = HashMap::with_capacity(n);
    for _ in 0..n {
        let (line, t) = lines.next("node line")?;
        if t.len() != 3 {
            return Err(lines.err(line, "expected `id x y`"));
        }
        let id: i64 = lines.num(line, t[0], "node id")?;
        let x: f64 = lines.num(line, t[1], "coordinate")?;
        let y: f64 = lines.num(line, t[2], "coordinate")?;
        if node_ids.insert(id, mesh.nodes.len()).is_some() {
            return Err(lines.err(line, format!("duplicate node id {id}")));
        }
        mesh.nodes.push([x, y]);
    }
    let node = |lines: &Lines, line: usize, tok: &str| -> Result<usize> {
        let id: i64 = lines.num(line, tok, "node id")?;
        node_ids
            .get(&id)
            .copied()
            .ok_or_else(|| lines.err(line, format!("unknown node id {id}")))
    };

    let m = lines.count("elements")?;
    let mut elem_ids = HashMap::with_capacity(m);
    for _ in 0..m {
        let (line, t) = lines.next("element line")?;
        if t.len() < 2 {
            return Err(lines.err(line, "expected `id type n1 .. nk`"));
        }
        let id: i64 = lines.num(line, t[0], "element id")?;
        let conn: Vec<usize> = t[2..].iter().map(|tok| node(&lines, line, tok)).collect::<Result<_>>()?;
        let cell = match (t[1], conn.len()) {
            ("quad4", 4) => Cell::Quad4([conn[0], conn[1], conn[2], conn[3]]),
            ("tri3", 3) => Cell::Tri3([conn[0], conn[1], conn[2]]),
            ("quad4" | "tri3", k) => {
                return Err(lines.err(
                    line,
                    format!("{} needs {} nodes, got {k}", t[1], if t[1] == "quad4" { 4 } else { 3 }),
                ))
            }
            (other, _) => return Err(lines.err(line, format!("unknown element type `{other}`"))),
        };
        if elem_ids.insert(id, mesh.cells.len()).is_some() {
            return Err(lines.err(line, format!("duplicate element id {id}")));
        }
        mesh.cells.push(cell);
    }

    while !lines.done() {
        let (line, t) = lines.next("set")?;
        if t.len() != 3 {
            return Err(lines.err(line, "expected `nodeset|edgeset|elemset NAME k`"));
        }
        let name = t[1].to_string();
        let k: usize = lines.num(line, t[2], "count")?;
        match t[0] {
            "nodeset" => {
                let mut ids = Vec::with_capacity(k);
                for _ in 0..k {
                    let (l, tt) = lines.next("node id")?;
                    if tt.len() != 1 {
                        return Err(lines.err(l, "expected one node id"));
                    }
                    ids.push(node(&lines, l, tt[0])?);
                }
                mesh.node_sets.insert(name, ids);
            }
            "edgeset" => {
                let mut edges = Vec::with_capacity(k);
                for _ in 0..k {
                    let (l, tt) = lines.next("node pair")?;
                    if tt.len() != 2 {
                        return Err(lines.err(l, "expected a node pair"));
                    }
                    edges.push([node(&lines, l, tt[0])?, node(&lines, l, tt[1])?]);
                }
                mesh.edge_sets.insert(name, edges);
            }
            "elemset" => {
                let mut ids = Vec::with_capacity(k);
                for _ in 0..k {
                    let (l, tt) = lines.next("element id")?;
                    let id: i64 = lines.num(l, tt[0], "element id")?;
                    let c = elem_ids
                        .get(&id)
                        .copied()
                        .ok_or_else(|| lines.err(l, format!("unknown element id {id}")))?;
                    ids.push(c);
                }
                mesh.cell_sets.insert(name, ids);
            }
            other => return Err(lines.err(line, format!("unknown section `{other}`"))),
        }
    }
    Ok(mesh)
}
