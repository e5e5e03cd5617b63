//! Cell-field import/export in the shared CSV format: a `# grid ...` header
//! line, then one cell value per line in canonical cell order (axis 0
//! fastest).

use thiserror::Error;

use crate::grid::{CellField, Grid, GridError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Grid(#[from] GridError),
}

pub fn field_to_csv(field: &CellField) -> String {
    let grid = field.grid();
    let join = |xs: &[f64]| {
        xs.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    let mut out = format!(
        "# grid dim={} n={} lo={} hi={}\n",
        grid.dim(),
        grid.n(),
        join(grid.lo()),
        join(grid.hi()),
    );
    for v in field.values() {
        out.push_str(&v.to_string());
        out.push('\n');
    }
    out
}

pub fn field_from_csv(text: &str) -> Result<CellField, IoError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(IoError::Malformed {
        line: 1,
        message: "empty input".into(),
    })?;
    let grid = parse_header(header)?;
    let mut values = Vec::with_capacity(grid.cell_count());
    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| IoError::Malformed {
            line: idx + 1,
            message: format!("bad cell value '{line}'"),
        })?;
        values.push(v);
    }
    Ok(CellField::new(grid, values)?)
}

fn parse_header(header: &str) -> Result<Grid, IoError> {
    let bad = |message: String| IoError::Malformed { line: 1, message };
    let rest = header
        .strip_prefix("# grid ")
        .ok_or_else(|| bad("header must start with '# grid '".into()))?;
    let mut dim = None;
    let mut n = None;
    let mut lo = None;
    let mut hi = None;
    for part in rest.split_whitespace() {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| bad(format!("bad header field '{part}'")))?;
        match key {
            "dim" => dim = Some(value.parse::<usize>().map_err(|_| bad(format!("bad dim '{value}'")))?),
            "n" => n = Some(value.parse::<usize>().map_err(|_| bad(format!("bad n '{value}'")))?),
            "lo" => lo = Some(parse_axis_list(value).map_err(bad)?),
            "hi" => hi = Some(parse_axis_list(value).map_err(bad)?),
            other => return Err(bad(format!("unknown header key '{other}'"))),
        }
    }
    let dim = dim.ok_or_else(|| bad("missing dim".into()))?;
    let n = n.ok_or_else(|| bad("missing n".into()))?;
    let lo = lo.ok_or_else(|| bad("missing lo".into()))?;
    let hi = hi.ok_or_else(|| bad("missing hi".into()))?;
    if dim == 0 || dim > 2 {
        return Err(bad(format!("dim must be 1 or 2, got {dim}")));
    }
    if lo.len() != dim || hi.len() != dim {
        return Err(bad(format!(
            "lo/hi must list {dim} per-axis bounds, got {}/{}",
            lo.len(),
            hi.len()
        )));
    }
    let mut lo2 = [0.0f64, 0.0];
    let mut hi2 = [1.0f64, 1.0];
    lo2[..dim].copy_from_slice(&lo);
    hi2[..dim].copy_from_slice(&hi);
    Ok(Grid::new(dim, n, lo2, hi2)?)
}

fn parse_axis_list(value: &str) -> Result<Vec<f64>, String> {
    value
        .split(',')
        .map(|v| v.parse::<f64>().map_err(|_| format!("bad bound '{v}'")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_1d() {
        let grid = Grid::line(8, -1.0, 1.0).unwrap();
        let field = CellField::new(grid, (0..8).map(|i| i as f64 + 0.5).collect()).unwrap();
        let text = field_to_csv(&field);
        let back = field_from_csv(&text).unwrap();
        assert_eq!(back.grid(), field.grid());
        assert_eq!(back.values(), field.values());
    }

    #[test]
    fn round_trip_2d() {
        let grid = Grid::square(4, [0.0, -2.0], [1.0, 2.0]).unwrap();
        let field = CellField::new(grid, (0..16).map(|i| (i % 5) as f64 + 1.0).collect()).unwrap();
        let back = field_from_csv(&field_to_csv(&field)).unwrap();
        assert_eq!(back.grid(), field.grid());
        assert_eq!(back.values(), field.values());
    }

    #[test]
    fn rejects_wrong_cell_count() {
        let text = "# grid dim=1 n=4 lo=0 hi=1\n1\n2\n3\n";
        assert!(field_from_csv(text).is_err());
    }

    #[test]
    fn rejects_bad_header() {
        assert!(field_from_csv("# mesh dim=1 n=4 lo=0 hi=1\n").is_err());
        assert!(field_from_csv("# grid dim=3 n=4 lo=0,0,0 hi=1,1,1\n").is_err());
    }
}
