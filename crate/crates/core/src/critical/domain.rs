use serde::{Deserialize, Serialize};

use super::CriticalError;
use crate::expr::PolynomialMap;

/// On-disk form: `{"box": [[lo, hi], ...], "constraints": ["1 - x^2 - y^2"]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainFile {
    #[serde(rename = "box")]
    pub bounds: Vec<[f64; 2]>,
    #[serde(default)]
    pub constraints: Vec<String>,
}

/// A closed box intersected with the open set where every constraint
/// `g_j(x) > 0`.
#[derive(Clone, Debug)]
pub struct Domain {
    bounds: Vec<[f64; 2]>,
    constraints: Option<PolynomialMap>,
}

impl Domain {
    pub fn new(bounds: Vec<[f64; 2]>) -> Result<Self, CriticalError> {
        if bounds.is_empty() {
            return Err(CriticalError::BadBox("no intervals".into()));
        }
        for (j, [lo, hi]) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(CriticalError::BadBox(format!("interval {j} is [{lo}, {hi}]")));
            }
        }
        Ok(Domain { bounds, constraints: None })
    }

    /// Attach constraints written over `vars`, which must be the variables of
    /// the map the domain is used with.
    pub fn with_constraints<S: AsRef<str>>(mut self, texts: &[S], vars: &[String]) -> Result<Self, CriticalError> {
        if vars.len() != self.dim() {
            return Err(CriticalError::DimensionMismatch { expected: self.dim(), got: vars.len() });
        }
        if texts.is_empty() {
            self.constraints = None;
            return Ok(self);
        }
        let mut comps = Vec::with_capacity(texts.len());
        for t in texts {
            let one = PolynomialMap::parse(t.as_ref(), vars)?;
            comps.extend(one.components().iter().cloned());
        }
        self.constraints = Some(PolynomialMap::from_components(vars.to_vec(), comps)?);
        Ok(self)
    }

    pub fn from_file(file: &DomainFile, vars: &[String]) -> Result<Self, CriticalError> {
        Domain::new(file.bounds.clone())?.with_constraints(&file.constraints, vars)
    }

    pub fn to_file(&self) -> DomainFile {
        DomainFile {
            bounds: self.bounds.clone(),
            constraints: self.constraints.as_ref().map(|c| c.component_strings()).unwrap_or_default(),
        }
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[[f64; 2]] {
        &self.bounds
    }

    pub fn constraints(&self) -> Option<&PolynomialMap> {
        self.constraints.as_ref()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.bounds.iter().map(|[lo, hi]| hi - lo).collect()
    }

    pub fn diameter(&self) -> f64 {
        self.widths().iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim() || !self.bounds.iter().zip(x).all(|([lo, hi], v)| *lo <= *v && *v <= *hi) {
            return false;
        }
        match &self.constraints {
            None => true,
            Some(g) => g.eval_f64(x).map(|vals| vals.iter().all(|v| *v > 0.0)).unwrap_or(false),
        }
    }

    /// First-order estimate of the distance to the frontier,
    /// `min_j |g_j(x)| / |grad g_j(x)|` with the gradient norm clamped below
    /// at `1e-8`. `None` without constraints.
    pub fn frontier_distance(&self, x: &[f64]) -> Option<f64> {
        let g = self.constraints.as_ref()?;
        let vals = g.eval_f64(x).ok()?;
        let jac = g.jacobian().eval_f64(x).ok()?;
        let mut best = f64::INFINITY;
        for (j, v) in vals.iter().enumerate() {
            let grad = jac.row(j).iter().map(|d| d * d).sum::<f64>().sqrt().max(1e-8);
            best = best.min(v.abs() / grad);
        }
        Some(best)
    }

    /// Move `x` onto the zero set of constraint `j` by Newton steps along
    /// the gradient. `None` if the gradient vanishes or the iteration stalls.
    pub(crate) fn project_to_frontier(&self, j: usize, x: &[f64]) -> Option<Vec<f64>> {
        let g = self.constraints.as_ref()?;
        let comp = &g.components()[j];
        let mut x = x.to_vec();
        for _ in 0..30 {
            let v = comp.eval(&x, &x[0]);
            let grad: Vec<f64> = (0..x.len()).map(|c| g.jacobian().entry(j, c).eval(&x, &x[0])).collect();
            let g2: f64 = grad.iter().map(|d| d * d).sum();
            if !(g2.sqrt() >= 1e-8) || !v.is_finite() {
                return None;
            }
            let xnorm = x.iter().map(|c| c * c).sum::<f64>().sqrt();
            if v.abs() / g2.sqrt() <= 1e-14 * (1.0 + xnorm) {
                return Some(x);
            }
            for (c, d) in x.iter_mut().zip(&grad) {
                *c -= v * d / g2;
            }
        }
        None
    }

    /// Unit gradient of constraint `j` at `x`, pointing into `g_j > 0`.
    pub(crate) fn inward_normal(&self, j: usize, x: &[f64]) -> Option<Vec<f64>> {
        let g = self.constraints.as_ref()?;
        let grad: Vec<f64> = (0..x.len()).map(|c| g.jacobian().entry(j, c).eval(x, &x[0])).collect();
        let norm = grad.iter().map(|d| d * d).sum::<f64>().sqrt();
        (norm >= 1e-8).then(|| grad.into_iter().map(|d| d / norm).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy() -> Vec<String> {
        vec!["x".into(), "y".into()]
    }

    #[test]
    fn parse_file() {
        let file: DomainFile =
            serde_json::from_str(r#"{"box": [[-2,2],[-2,2]], "constraints": ["1 - x^2 - y^2"]}"#).unwrap();
        let d = Domain::from_file(&file, &xy()).unwrap();
        assert!(d.contains(&[0.5, 0.5]));
        assert!(!d.contains(&[0.9, 0.9]));
        assert!(!d.contains(&[1.0, 0.0]));
        assert!(!d.contains(&[3.0, 0.0]));
        assert_eq!(d.to_file().constraints.len(), 1);
        let bare: DomainFile = serde_json::from_str(r#"{"box": [[0,1]]}"#).unwrap();
        assert!(bare.constraints.is_empty());
    }

    #[test]
    fn bad_boxes() {
        assert!(Domain::new(vec![]).is_err());
        assert!(Domain::new(vec![[1.0, 1.0]]).is_err());
        assert!(Domain::new(vec![[0.0, f64::NAN]]).is_err());
        let d = Domain::new(vec![[0.0, 1.0]]).unwrap();
        assert!(d.with_constraints(&["x"], &xy()).is_err());
    }

    #[test]
    fn frontier_proxy() {
        let d = Domain::new(vec![[-1.0, 1.0], [-1.0, 1.0]]).unwrap().with_constraints(&["x"], &xy()).unwrap();
        assert_eq!(d.frontier_distance(&[0.25, 0.7]), Some(0.25));
        let p = d.project_to_frontier(0, &[0.4, 0.1]).unwrap();
        assert_eq!(p, vec![0.0, 0.1]);
        assert_eq!(d.inward_normal(0, &p), Some(vec![1.0, 0.0]));
        assert_eq!(Domain::new(vec![[0.0, 1.0]]).unwrap().frontier_distance(&[0.5]), None);
    }

    #[test]
    fn circle_projection() {
        let d = Domain::new(vec![[-2.0, 2.0]; 2]).unwrap().with_constraints(&["1 - x^2 - y^2"], &xy()).unwrap();
        let p = d.project_to_frontier(0, &[0.3, 0.4]).unwrap();
        let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
        assert!((r - 1.0).abs() < 1e-12);
        let dist = d.frontier_distance(&[0.0, 0.9]).unwrap();
        // first-order proxy: (1 - 0.81) / 1.8
        assert!((dist - 0.19 / 1.8).abs() < 1e-12);
    }
}
