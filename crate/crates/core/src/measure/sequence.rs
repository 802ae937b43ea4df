use std::sync::Arc;

use super::mass::MassFunction;
use super::space::ProductSpace;
use crate::error::{Error, Result};

/// Finite description of the infinite tail of a law sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailRule {
    /// `P_n = P` for every `n > M`.
    EventuallyEqual(usize),
}

impl TailRule {
    pub fn horizon(&self) -> usize {
        match *self {
            TailRule::EventuallyEqual(m) => m,
        }
    }
}

/// Laws `P_1, ..., P_M` and limit `P` on one product space, with `P_n = P`
/// past the tail index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessSequenceSpec {
    space: Arc<ProductSpace>,
    members: Vec<MassFunction>,
    limit: MassFunction,
    tail: TailRule,
}

impl ProcessSequenceSpec {
    pub fn new(
        space: Arc<ProductSpace>,
        members: Vec<MassFunction>,
        limit: MassFunction,
        tail: TailRule,
    ) -> Result<Self> {
        if space.is_empty() {
            return Err(Error::InvalidSpec("space needs at least one coordinate".into()));
        }
        let horizon = tail.horizon();
        if horizon < 1 {
            return Err(Error::InvalidSpec("tail index must be at least 1".into()));
        }
        if members.len() != horizon {
            return Err(Error::InvalidSpec(format!(
                "tail index {horizon} requires exactly {horizon} members, got {}",
                members.len()
            )));
        }
        for (i, law) in members.iter().chain(std::iter::once(&limit)).enumerate() {
            let what = if i < horizon {
                format!("member {}", i + 1)
            } else {
                "limit".to_string()
            };
            if **law.space() != *space {
                return Err(Error::SpaceMismatch(format!("{what} is not on the spec space")));
            }
            law.require_probability(&what)?;
        }
        Ok(Self {
            space,
            members,
            limit,
            tail,
        })
    }

    /// Spec whose members all equal the limit.
    pub fn constant(limit: MassFunction, horizon: usize) -> Result<Self> {
        let space = limit.space().clone();
        Self::new(
            space,
            vec![limit.clone(); horizon],
            limit,
            TailRule::EventuallyEqual(horizon),
        )
    }

    pub fn space(&self) -> &Arc<ProductSpace> {
        &self.space
    }

    pub fn members(&self) -> &[MassFunction] {
        &self.members
    }

    pub fn limit(&self) -> &MassFunction {
        &self.limit
    }

    pub fn tail(&self) -> TailRule {
        self.tail
    }

    pub fn horizon(&self) -> usize {
        self.tail.horizon()
    }

    /// Full coordinate count; the largest legal window.
    pub fn full_window(&self) -> usize {
        self.space.len()
    }

    /// `P_n` for `n >= 1`, the limit past the tail index.
    pub fn law(&self, n: usize) -> &MassFunction {
        assert!(n >= 1, "sequence indices start at 1");
        self.members.get(n - 1).unwrap_or(&self.limit)
    }

    fn check_window(&self, k: usize) -> Result<()> {
        if k > self.full_window() {
            Err(Error::WindowOutOfRange {
                window: k,
                coordinates: self.full_window(),
            })
        } else {
            Ok(())
        }
    }

    /// Pointwise infimum over `j >= n` of the `k`-window marginals of `P_j`.
    ///
    /// Under the tail rule the infinite family reduces to `{P_n, ..., P_M, P}`.
    pub fn inf_window_density(&self, n: usize, k: usize) -> Result<MassFunction> {
        if n < 1 {
            return Err(Error::InvalidSpec("sequence indices start at 1".into()));
        }
        self.check_window(k)?;
        let mut inf = self.limit.window_marginal(k)?;
        for law in self.members.iter().skip(n - 1) {
            inf = inf.pointwise_min(&law.window_marginal(k)?)?;
        }
        Ok(inf)
    }

    /// First index `n <= M + 1` at which the infimum density already equals
    /// the limit marginal, or `None` if there is none. By monotonicity in
    /// `n`, `Some` decides `liminf f_n = f` in window `k`.
    pub fn check_density_convergence(&self, k: usize) -> Result<Option<usize>> {
        self.check_window(k)?;
        let target = self.limit.window_marginal(k)?;
        for n in 1..=self.horizon() + 1 {
            if self.inf_window_density(n, k)? == target {
                return Ok(Some(n));
            }
        }
        Ok(None)
    }
}
