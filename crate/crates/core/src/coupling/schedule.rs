use crate::error::{Error, Result};
use crate::measure::ProcessSequenceSpec;
use crate::rational::{self, Rational};
use num_traits::One;

/// Window lengths `k_1 <= ... <= k_{M+1}` with the certified mass deficit of
/// the infimum measure in each scheduled window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowSchedule {
    windows: Vec<usize>,
    deficits: Vec<Rational>,
    horizon: usize,
}

impl WindowSchedule {
    /// Raw constructor used when loading documents; no certification.
    pub fn from_parts(windows: Vec<usize>, deficits: Vec<Rational>, horizon: usize) -> Result<Self> {
        if windows.len() != horizon + 1 || deficits.len() != horizon + 1 {
            return Err(Error::Document(format!(
                "schedule for tail index {horizon} needs {} entries",
                horizon + 1
            )));
        }
        Ok(Self {
            windows,
            deficits,
            horizon,
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Number of scheduled indices, `M + 1`.
    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn windows(&self) -> &[usize] {
        &self.windows
    }

    /// `k_n` for `1 <= n <= M + 1`.
    pub fn window(&self, n: usize) -> usize {
        self.windows[n - 1]
    }

    /// `1 - |nu_n^{k_n}|`.
    pub fn deficit(&self, n: usize) -> &Rational {
        &self.deficits[n - 1]
    }

    pub fn deficits(&self) -> &[Rational] {
        &self.deficits
    }

    pub fn bound(n: usize) -> Rational {
        rational::pow2_neg(n as u32)
    }
}

/// Largest non-decreasing schedule with `1 - |nu_n^{k_n}| <= 2^-n`.
///
/// The deficit is non-decreasing in the window (a finer window can only lower
/// the infimum mass), so the feasible windows for index `n` form an interval
/// `[0, tau_n]`. The pointwise-largest non-decreasing choice is then
/// `k_n = min_{m >= n} tau_m`, and `tau_{M+1}` is the full window because
/// the infimum past the tail index is the limit itself.
pub fn build_schedule(spec: &ProcessSequenceSpec) -> Result<WindowSchedule> {
    let full = spec.full_window();
    for k in 0..=full {
        if spec.check_density_convergence(k)?.is_none() {
            return Err(Error::NotConvergent { window: k });
        }
    }
    let last = spec.horizon() + 1;
    let mut tau = Vec::with_capacity(last);
    for n in 1..=last {
        let bound = WindowSchedule::bound(n);
        let mut chosen = None;
        for k in (0..=full).rev() {
            let deficit = Rational::one() - spec.inf_window_density(n, k)?.total();
            if deficit <= bound {
                chosen = Some(k);
                break;
            }
        }
        // k = 0 has deficit 0 for any probability sequence.
        let k = chosen.ok_or_else(|| Error::Internal(format!("no feasible window at n={n}")))?;
        tau.push(k);
    }
    let mut windows = tau.clone();
    for i in (0..last.saturating_sub(1)).rev() {
        windows[i] = windows[i].min(windows[i + 1]);
    }
    if windows[last - 1] != full {
        return Err(Error::Internal("schedule does not reach the full window".into()));
    }
    let deficits = windows
        .iter()
        .enumerate()
        .map(|(i, &k)| Ok(Rational::one() - spec.inf_window_density(i + 1, k)?.total()))
        .collect::<Result<Vec<_>>>()?;
    WindowSchedule::from_parts(windows, deficits, spec.horizon())
}
