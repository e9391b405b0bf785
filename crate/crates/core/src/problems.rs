//! Problem definitions: the generic semilinear PDE/BSDE template plus the
//! two concrete benchmark families (European option portfolios under
//! geometric dynamics, and a gradient-squared stochastic-control problem).
//!
//! A problem couples a forward diffusion `dX = b(X) dt + σ(X) dW` with a
//! backward equation `dY = -f(t, X, Y, Z) dt + Z·dW`, `Y_T = g(X_T)`. The
//! solver looks for the initial value `Y_0` and the control process `Z`.

use crate::error::{Error, Result};

/// Nonlinearity `f(t, x, y, z)` of the backward equation, with the partial
/// derivatives the training rollout needs.
pub trait Driver: Send + Sync {
    fn value(&self, t: f64, x: &[f64], y: f64, z: &[f64]) -> f64;

    /// ∂f/∂y at the same point.
    fn dy(&self, t: f64, x: &[f64], y: f64, z: &[f64]) -> f64;

    /// ∂f/∂z written into `out` (length = dim).
    fn dz(&self, t: f64, x: &[f64], y: f64, z: &[f64], out: &mut [f64]);
}

/// f ≡ 0.
pub struct ZeroDriver;

impl Driver for ZeroDriver {
    fn value(&self, _t: f64, _x: &[f64], _y: f64, _z: &[f64]) -> f64 {
        0.0
    }
    fn dy(&self, _t: f64, _x: &[f64], _y: f64, _z: &[f64]) -> f64 {
        0.0
    }
    fn dz(&self, _t: f64, _x: &[f64], _y: f64, _z: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }
}

/// f = coeff · y. A discounting-type driver linear in the value.
pub struct LinearYDriver {
    pub coeff: f64,
}

impl Driver for LinearYDriver {
    fn value(&self, _t: f64, _x: &[f64], y: f64, _z: &[f64]) -> f64 {
        self.coeff * y
    }
    fn dy(&self, _t: f64, _x: &[f64], _y: f64, _z: &[f64]) -> f64 {
        self.coeff
    }
    fn dz(&self, _t: f64, _x: &[f64], _y: f64, _z: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }
}

/// f = coeff · ‖z‖². The gradient-squared control nonlinearity.
pub struct SquaredZDriver {
    pub coeff: f64,
}

impl Driver for SquaredZDriver {
    fn value(&self, _t: f64, _x: &[f64], _y: f64, z: &[f64]) -> f64 {
        self.coeff * z.iter().map(|v| v * v).sum::<f64>()
    }
    fn dy(&self, _t: f64, _x: &[f64], _y: f64, _z: &[f64]) -> f64 {
        0.0
    }
    fn dz(&self, _t: f64, _x: &[f64], _y: f64, z: &[f64], out: &mut [f64]) {
        for (o, zi) in out.iter_mut().zip(z) {
            *o = 2.0 * self.coeff * zi;
        }
    }
}

/// Structured diffusion coefficient σ(x).
pub enum Diffusion {
    /// σ(x) = c · I.
    Scalar(f64),
    /// σ(x) = c · diag(x).
    StateDiag(f64),
}

/// Forward dynamics, together with the coordinate system they are simulated
/// in.
pub enum Dynamics {
    /// `dX = b(X) dt + σ(X) dW` stepped directly in natural coordinates.
    Direct {
        drift: Box<dyn Fn(&[f64], &mut [f64]) + Send + Sync>,
        diffusion: Diffusion,
    },
    /// `dX = rate·X dt + vol·X dW` stepped in log coordinates and
    /// exponentiated, so states stay strictly positive.
    GeometricLog { rate: f64, vol: f64 },
}

/// A complete semilinear problem instance.
pub struct ProblemSpec {
    pub dim: usize,
    pub dynamics: Dynamics,
    pub driver: Box<dyn Driver>,
    pub terminal: Box<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    pub initial: Vec<f64>,
    pub horizon: f64,
    pub label: String,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if self.initial.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "initial point has {} coordinates, problem dimension is {}",
                self.initial.len(),
                self.dim
            )));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::InvalidArgument("horizon must be positive".into()));
        }
        if self.log_space() && self.initial.iter().any(|&x| x <= 0.0) {
            return Err(Error::InvalidArgument(
                "log-space dynamics need a strictly positive initial point".into(),
            ));
        }
        Ok(())
    }

    /// True when forward simulation runs in log coordinates.
    pub fn log_space(&self) -> bool {
        matches!(self.dynamics, Dynamics::GeometricLog { .. })
    }
}

/// Call or put payoff direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptionKind {
    Call,
    Put,
}

impl OptionKind {
    pub fn label(self) -> &'static str {
        match self {
            OptionKind::Call => "call",
            OptionKind::Put => "put",
        }
    }
}

impl std::fmt::Display for OptionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Parameters of a portfolio of identical European options on independent
/// assets with common rate, volatility, spot and strike.
#[derive(Debug, Clone, Copy)]
pub struct BlackScholesParams {
    pub rate: f64,
    pub vol: f64,
    pub strike: f64,
    pub spot: f64,
    pub is_call: bool,
    pub num_options: usize,
}

impl BlackScholesParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.vol > 0.0) {
            return Err(Error::InvalidArgument("volatility must be positive".into()));
        }
        if !(self.spot > 0.0) {
            return Err(Error::InvalidArgument("spot must be positive".into()));
        }
        if !(self.strike > 0.0) {
            return Err(Error::InvalidArgument("strike must be positive".into()));
        }
        if self.num_options == 0 {
            return Err(Error::InvalidArgument(
                "portfolio needs at least one option".into(),
            ));
        }
        if !self.rate.is_finite() {
            return Err(Error::InvalidArgument("rate must be finite".into()));
        }
        Ok(())
    }
}

/// Parameters of the gradient-squared control problem.
#[derive(Debug, Clone, Copy)]
pub struct HjbParams {
    pub lambda: f64,
    pub dim: usize,
}

impl HjbParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) {
            return Err(Error::InvalidArgument(
                "control strength lambda must be positive".into(),
            ));
        }
        if self.dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        Ok(())
    }
}

/// Portfolio of `num_options` independent options, one per coordinate.
///
/// Dynamics: each coordinate follows `dX = r X dt + σ X dW` (stepped in log
/// space). Backward equation: `dY = r Y dt + Z·dW`, i.e. driver `f = -r·y`,
/// so the trained initial value is the discounted risk-neutral price.
/// Terminal value: per-coordinate payoff summed over the portfolio.
pub fn make_black_scholes(params: &BlackScholesParams, horizon: f64) -> Result<ProblemSpec> {
    params.validate()?;
    let dim = params.num_options;
    let strike = params.strike;
    let is_call = params.is_call;
    let terminal = move |x: &[f64]| -> f64 {
        x.iter()
            .map(|&xi| {
                if is_call {
                    (xi - strike).max(0.0)
                } else {
                    (strike - xi).max(0.0)
                }
            })
            .sum()
    };
    let spec = ProblemSpec {
        dim,
        dynamics: Dynamics::GeometricLog {
            rate: params.rate,
            vol: params.vol,
        },
        driver: Box::new(LinearYDriver {
            coeff: -params.rate,
        }),
        terminal: Box::new(terminal),
        initial: vec![params.spot; dim],
        horizon,
        label: format!(
            "black_scholes_{}_k{}_d{}",
            if is_call { "call" } else { "put" },
            strike,
            dim
        ),
    };
    spec.validate()?;
    Ok(spec)
}

/// Gradient-squared control problem: `dX = √2 dW` from the origin, driver
/// `f = -λ‖z‖²`, terminal value `g(x) = ln((1 + ‖x‖²) / 2)`.
pub fn make_hjb(params: &HjbParams, horizon: f64) -> Result<ProblemSpec> {
    params.validate()?;
    let spec = ProblemSpec {
        dim: params.dim,
        dynamics: Dynamics::Direct {
            drift: Box::new(|_x, out| out.fill(0.0)),
            diffusion: Diffusion::Scalar(std::f64::consts::SQRT_2),
        },
        driver: Box::new(SquaredZDriver {
            coeff: -params.lambda,
        }),
        terminal: Box::new(hjb_terminal),
        initial: vec![0.0; params.dim],
        horizon,
        label: format!("hjb_lambda{}_d{}", params.lambda, params.dim),
    };
    spec.validate()?;
    Ok(spec)
}

/// Terminal condition of the control problem.
pub fn hjb_terminal(x: &[f64]) -> f64 {
    let norm_sq: f64 = x.iter().map(|v| v * v).sum();
    ((1.0 + norm_sq) / 2.0).ln()
}

/// Degenerate calibration problem: `g ≡ value`, `f ≡ 0`, `dX = dW`. The
/// optimal initial value equals `value` exactly; useful as a smoke test for
/// the full pipeline.
pub fn make_constant(value: f64, dim: usize, horizon: f64) -> Result<ProblemSpec> {
    let spec = ProblemSpec {
        dim,
        dynamics: Dynamics::Direct {
            drift: Box::new(|_x, out| out.fill(0.0)),
            diffusion: Diffusion::Scalar(1.0),
        },
        driver: Box::new(ZeroDriver),
        terminal: Box::new(move |_x| value),
        initial: vec![0.0; dim.max(1)],
        horizon,
        label: format!("constant_{value}_d{dim}"),
    };
    spec.validate()?;
    Ok(spec)
}
