use super::TimeError;

/// Uniform grid `t_n = n δt`, `n = 0..=N`, `δt = T/N`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    t_final: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, n_steps: usize) -> Result<Self, TimeError> {
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(TimeError::Grid(format!("final time must be positive, got {t_final}")));
        }
        if n_steps == 0 {
            return Err(TimeError::Grid("at least one time step is required".into()));
        }
        Ok(Self { t_final, n_steps })
    }

    /// Grid with step `dt`; `t_final / dt` must be an integer within 1e-9.
    pub fn from_step(t_final: f64, dt: f64) -> Result<Self, TimeError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(TimeError::Grid(format!("time step must be positive, got {dt}")));
        }
        let ratio = t_final / dt;
        let n = ratio.round();
        if (ratio - n).abs() > 1e-9 * n.max(1.0) || n < 1.0 {
            return Err(TimeError::Grid(format!(
                "time step {dt} does not divide final time {t_final}"
            )));
        }
        Self::new(t_final, n as usize)
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_levels(&self) -> usize {
        self.n_steps + 1
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.n_steps as f64
    }

    pub fn time(&self, n: usize) -> f64 {
        self.t_final * n as f64 / self.n_steps as f64
    }

    /// Level whose time is closest to `t` (ties go to the earlier level).
    pub fn nearest_level(&self, t: f64) -> usize {
        let x = (t / self.dt()).clamp(0.0, self.n_steps as f64);
        let lo = x.floor();
        if x - lo <= 0.5 {
            lo as usize
        } else {
            lo as usize + 1
        }
    }
}

/// Velocity coefficient vectors at the `N + 1` levels of a time grid, with
/// optional pressures.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldTrajectory {
    grid: TimeGrid,
    levels: Vec<Vec<f64>>,
    pressure: Option<Vec<Vec<f64>>>,
}

impl FieldTrajectory {
    pub fn new(grid: TimeGrid, levels: Vec<Vec<f64>>) -> Result<Self, TimeError> {
        if levels.len() != grid.n_levels() {
            return Err(TimeError::Levels {
                expected: grid.n_levels(),
                found: levels.len(),
            });
        }
        Ok(Self {
            grid,
            levels,
            pressure: None,
        })
    }

    pub fn zeros(grid: TimeGrid, n_dofs: usize) -> Self {
        let levels = vec![vec![0.0; n_dofs]; grid.n_levels()];
        Self {
            grid,
            levels,
            pressure: None,
        }
    }

    pub fn with_pressure(mut self, pressure: Vec<Vec<f64>>) -> Result<Self, TimeError> {
        if pressure.len() != self.grid.n_levels() {
            return Err(TimeError::Levels {
                expected: self.grid.n_levels(),
                found: pressure.len(),
            });
        }
        self.pressure = Some(pressure);
        Ok(self)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn level(&self, n: usize) -> &[f64] {
        &self.levels[n]
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    pub fn pressure(&self) -> Option<&[Vec<f64>]> {
        self.pressure.as_deref()
    }

    pub fn into_levels(self) -> Vec<Vec<f64>> {
        self.levels
    }

    /// `self + alpha * other`, level by level. Pressures are dropped.
    pub fn add_scaled(&self, alpha: f64, other: &FieldTrajectory) -> FieldTrajectory {
        assert_eq!(self.grid, other.grid, "trajectories on different grids");
        let levels = self
            .levels
            .iter()
            .zip(&other.levels)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + alpha * y).collect())
            .collect();
        FieldTrajectory {
            grid: self.grid.clone(),
            levels,
            pressure: None,
        }
    }

    pub fn scaled(&self, alpha: f64) -> FieldTrajectory {
        FieldTrajectory {
            grid: self.grid.clone(),
            levels: self
                .levels
                .iter()
                .map(|l| l.iter().map(|x| alpha * x).collect())
                .collect(),
            pressure: None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.levels.iter().flatten().all(|v| v.is_finite())
    }
}
