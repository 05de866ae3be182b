//! Functions sampled on rectangular 1D/2D grids and their CSV/JSON forms.
//!
//! Nodes are stored row-major with `axis0` varying slowest, so the flat node
//! index order is the lexicographic order of the coordinates.

use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ext::ExtendedReal;
use super::function::ConvexFunction;
use crate::error::{Error, Result};

/// `lo:hi:n`: `n` equispaced samples from `lo` to `hi` inclusive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl AxisSpec {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || !(lo < hi) {
            return Err(Error::InvalidGrid(format!("need finite lo < hi, got {lo}:{hi}")));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 samples, got {n}")));
        }
        Ok(AxisSpec { lo, hi, n })
    }

    pub fn coords(&self) -> Vec<f64> {
        let step = (self.hi - self.lo) / (self.n - 1) as f64;
        (0..self.n).map(|i| if i + 1 == self.n { self.hi } else { self.lo + step * i as f64 }).collect()
    }
}

impl FromStr for AxisSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("axis spec must be lo:hi:n, got `{s}`")));
        }
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{t}` in `{s}`")));
        let n = parts[2].trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad sample count in `{s}`")))?;
        AxisSpec::new(num(parts[0])?, num(parts[1])?, n)
    }
}

/// One [`AxisSpec`] per dimension, written `lo:hi:n[,lo:hi:n]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec(pub Vec<AxisSpec>);

impl GridSpec {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn axes(&self) -> Vec<Vec<f64>> {
        self.0.iter().map(AxisSpec::coords).collect()
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let axes = s.split(',').map(str::parse).collect::<Result<Vec<AxisSpec>>>()?;
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::InvalidGrid(format!("grids have 1 or 2 axes, got {}", axes.len())));
        }
        Ok(GridSpec(axes))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    axes: Vec<Vec<f64>>,
    values: Vec<ExtendedReal>,
}

impl GridFunction {
    pub fn new(axes: Vec<Vec<f64>>, values: Vec<ExtendedReal>) -> Result<Self> {
        Self::check_axes(&axes)?;
        let count: usize = axes.iter().map(Vec::len).product();
        if values.len() != count {
            return Err(Error::InvalidGrid(format!("{} values for {count} nodes", values.len())));
        }
        if !values.iter().any(|v| v.is_finite()) {
            return Err(Error::InvalidGrid("a grid function needs at least one finite value".into()));
        }
        Ok(GridFunction { axes, values })
    }

    pub(crate) fn check_axes(axes: &[Vec<f64>]) -> Result<()> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::InvalidGrid(format!("grids have 1 or 2 axes, got {}", axes.len())));
        }
        for (i, axis) in axes.iter().enumerate() {
            if axis.len() < 2 {
                return Err(Error::InvalidGrid(format!("axis {i} has fewer than 2 samples")));
            }
            if axis.iter().any(|x| !x.is_finite()) || axis.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::InvalidGrid(format!("axis {i} must be finite and strictly increasing")));
            }
        }
        Ok(())
    }

    /// Evaluates `f` at every node; +∞ is recorded outside the domain.
    pub fn sample(f: &ConvexFunction, spec: &GridSpec) -> Result<Self> {
        crate::affine::check_dim(f.dim(), spec.dim())?;
        let axes = spec.axes();
        let values = node_iter(&axes).map(|node| f.eval(&node)).collect::<Result<Vec<_>>>()?;
        GridFunction::new(axes, values)
    }

    /// Applies `g` to every finite value; `+∞` stays `+∞`.
    pub fn map_finite(&self, g: impl Fn(&[f64], f64) -> f64) -> Result<Self> {
        let values = self
            .nodes()
            .zip(&self.values)
            .map(|(node, v)| match v.finite() {
                Some(x) => ExtendedReal::from_f64(g(&node, x)),
                None => Ok(*v),
            })
            .collect::<Result<Vec<_>>>()?;
        GridFunction::new(self.axes.clone(), values)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }
    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }
    pub fn values(&self) -> &[ExtendedReal] {
        &self.values
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Coordinates of flat node `i`.
    pub fn node(&self, i: usize) -> Vec<f64> {
        match self.axes.len() {
            1 => vec![self.axes[0][i]],
            _ => {
                let n1 = self.axes[1].len();
                vec![self.axes[0][i / n1], self.axes[1][i % n1]]
            }
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        node_iter(&self.axes)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (0..self.dim()).map(|i| format!("axis{i}")).collect();
        header.push("value".into());
        w.write_record(&header)?;
        for (node, v) in self.nodes().zip(&self.values) {
            let mut row: Vec<String> = node.iter().map(|x| x.to_string()).collect();
            row.push(v.to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header: Vec<String> = r.headers()?.iter().map(|s| s.trim().to_string()).collect();
        let dim = match header.as_slice() {
            [a, v] if a == "axis0" && v == "value" => 1,
            [a, b, v] if a == "axis0" && b == "axis1" && v == "value" => 2,
            _ => return Err(Error::Parse(format!("expected header axis0[,axis1],value, got {header:?}"))),
        };
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let coords = (0..dim)
                .map(|i| rec[i].trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad coordinate `{}`", &rec[i]))))
                .collect::<Result<Vec<f64>>>()?;
            rows.push(GridRow { coords, value: rec[dim].parse()? });
        }
        Self::from_rows(dim, rows)
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<serde_json::Value> = self
            .nodes()
            .zip(&self.values)
            .map(|(node, v)| {
                let mut obj = serde_json::Map::new();
                for (i, x) in node.iter().enumerate() {
                    obj.insert(format!("axis{i}"), serde_json::json!(x));
                }
                obj.insert("value".into(), serde_json::to_value(v).expect("value serializes"));
                serde_json::Value::Object(obj)
            })
            .collect();
        serde_json::to_string_pretty(&rows).expect("grid serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize, Serialize)]
        struct Row {
            axis0: f64,
            axis1: Option<f64>,
            value: ExtendedReal,
        }
        let rows: Vec<Row> = serde_json::from_str(text)?;
        let dim = if rows.first().is_some_and(|r| r.axis1.is_some()) { 2 } else { 1 };
        let rows = rows
            .into_iter()
            .map(|r| {
                let mut coords = vec![r.axis0];
                if dim == 2 {
                    coords.push(r.axis1.ok_or_else(|| Error::Parse("missing axis1".into()))?);
                }
                Ok(GridRow { coords, value: r.value })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(dim, rows)
    }

    fn from_rows(dim: usize, rows: Vec<GridRow>) -> Result<Self> {
        let mut axes: Vec<Vec<f64>> = vec![Vec::new(); dim];
        for row in &rows {
            for (axis, x) in axes.iter_mut().zip(&row.coords) {
                if !axis.contains(x) {
                    axis.push(*x);
                }
            }
        }
        for axis in &mut axes {
            axis.sort_by(f64::total_cmp);
        }
        Self::check_axes(&axes)?;
        let expected: Vec<Vec<f64>> = node_iter(&axes).collect();
        if rows.len() != expected.len() || rows.iter().zip(&expected).any(|(r, e)| &r.coords != e) {
            return Err(Error::InvalidGrid("rows must list every node once, axis0 slowest".into()));
        }
        GridFunction::new(axes, rows.into_iter().map(|r| r.value).collect())
    }
}

struct GridRow {
    coords: Vec<f64>,
    value: ExtendedReal,
}

pub(crate) fn node_iter(axes: &[Vec<f64>]) -> Box<dyn Iterator<Item = Vec<f64>> + '_> {
    match axes.len() {
        1 => Box::new(axes[0].iter().map(|x| vec![*x])),
        _ => Box::new(axes[0].iter().flat_map(move |x| axes[1].iter().map(move |y| vec![*x, *y]))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::catalog::lookup_spec;
    use crate::funcspace::ext::{ExtendedReal::Finite, PosInf};

    #[test]
    fn axis_spec_parsing() {
        let a: AxisSpec = "-3:3:601".parse().unwrap();
        assert_eq!(a.coords().len(), 601);
        assert_eq!(a.coords()[600], 3.0);
        assert!("1:1:5".parse::<AxisSpec>().is_err());
        assert!("0:1:1".parse::<AxisSpec>().is_err());
        assert!("0:1".parse::<AxisSpec>().is_err());
        let g: GridSpec = "-1:1:3,0:2:5".parse().unwrap();
        assert_eq!(g.dim(), 2);
        assert!("0:1:2,0:1:2,0:1:2".parse::<GridSpec>().is_err());
    }

    #[test]
    fn sample_examples() {
        let spec: GridSpec = "-1:1:3".parse().unwrap();
        let e = GridFunction::sample(&lookup_spec("exp").unwrap(), &spec).unwrap();
        let want = [(-1.0f64).exp(), 1.0, 1.0f64.exp()];
        for (v, w) in e.values().iter().zip(want) {
            assert!((v.to_f64() - w).abs() < 1e-15);
        }
        let ind = GridFunction::sample(&lookup_spec("indicator-point{a=[0]}").unwrap(), &spec).unwrap();
        assert_eq!(ind.values(), &[PosInf, Finite(0.0), PosInf]);

        let spec2: GridSpec = "-1:1:3,-1:1:3".parse().unwrap();
        let r = GridFunction::sample(&lookup_spec("rockafellar-2d").unwrap(), &spec2).unwrap();
        for (node, v) in r.nodes().zip(r.values()) {
            assert_eq!(v.is_pos_inf(), node[1] <= 0.0, "{node:?}");
        }
    }

    #[test]
    fn invalid_grids() {
        assert!(GridFunction::new(vec![vec![0.0, 0.0]], vec![Finite(0.0); 2]).is_err());
        assert!(GridFunction::new(vec![vec![0.0, 1.0]], vec![PosInf; 2]).is_err());
        assert!(GridFunction::new(vec![vec![0.0, 1.0]], vec![Finite(0.0)]).is_err());
    }

    #[test]
    fn csv_layout_and_round_trip() {
        let g = GridFunction::new(
            vec![vec![-1.0, 0.0], vec![0.5, 1.5]],
            vec![Finite(1.0), PosInf, Finite(-2.5), ExtendedReal::NegInf],
        )
        .unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "axis0,axis1,value\n-1,0.5,1\n-1,1.5,inf\n0,0.5,-2.5\n0,1.5,-inf\n");
        assert_eq!(GridFunction::read_csv(buf.as_slice()).unwrap(), g);
        assert_eq!(GridFunction::from_json(&g.to_json()).unwrap(), g);
    }

    #[test]
    fn csv_rejects_missing_nodes() {
        let text = "axis0,value\n0,1\n2,3\n1,4\n";
        assert!(GridFunction::read_csv(text.as_bytes()).is_err());
        assert!(GridFunction::read_csv("x,value\n0,1\n1,2\n".as_bytes()).is_err());
    }
}
