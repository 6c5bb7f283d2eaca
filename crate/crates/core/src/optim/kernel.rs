use serde::{Deserialize, Serialize};

/// Quantity whose square feeds the second-moment EMA.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecondMomentInput {
    /// `k_t = g_t` (Adam, RMSprop, Rprop)
    RawGrad,
    /// `k_t = m_t` (AdaMomentum)
    Momentum,
    /// `k_t = g_t - m_t` (AdaBelief)
    GradMinusMomentum,
    /// No preconditioner; `v` stays at zero and the denominator is 1.
    None,
}

/// Where the damping term enters the update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsPlacement {
    /// Added to `v` on every step, so it ends up under the square root.
    InsideAccumulator,
    /// Added after the square root: `sqrt(v_hat) + eps`.
    OutsideSqrt,
}

/// The algorithmic knobs of the unified Adam-alike update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub second_moment_input: SecondMomentInput,
    pub eps_placement: EpsPlacement,
    pub bias_correction: bool,
    /// Replace `m_hat / denom` by `sign(m_hat)`.
    pub sign_only: bool,
}

impl KernelSpec {
    pub const ADAMOMENTUM: KernelSpec = KernelSpec {
        second_moment_input: SecondMomentInput::Momentum,
        eps_placement: EpsPlacement::InsideAccumulator,
        bias_correction: true,
        sign_only: false,
    };

    pub const ADAM: KernelSpec = KernelSpec {
        second_moment_input: SecondMomentInput::RawGrad,
        eps_placement: EpsPlacement::OutsideSqrt,
        bias_correction: true,
        sign_only: false,
    };

    pub const RMSPROP: KernelSpec = KernelSpec {
        second_moment_input: SecondMomentInput::RawGrad,
        eps_placement: EpsPlacement::OutsideSqrt,
        bias_correction: false,
        sign_only: false,
    };

    pub const RPROP: KernelSpec = KernelSpec {
        second_moment_input: SecondMomentInput::RawGrad,
        eps_placement: EpsPlacement::OutsideSqrt,
        bias_correction: false,
        sign_only: true,
    };

    pub const ADABELIEF: KernelSpec = KernelSpec {
        second_moment_input: SecondMomentInput::GradMinusMomentum,
        eps_placement: EpsPlacement::InsideAccumulator,
        bias_correction: true,
        sign_only: false,
    };

    pub const SGD: KernelSpec = KernelSpec {
        second_moment_input: SecondMomentInput::None,
        eps_placement: EpsPlacement::OutsideSqrt,
        bias_correction: false,
        sign_only: false,
    };
}

/// Named optimizers from the Adam family, each a fixed kernel configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    #[serde(alias = "adamm")]
    Adamomentum,
    Adam,
    /// Adam kernel with decoupled weight decay.
    Adamw,
    Rmsprop,
    Rprop,
    Adabelief,
    /// Heavy-ball SGD; plain SGD when `beta1 = 0`.
    Sgd,
}

impl OptimizerKind {
    pub fn kernel(self) -> KernelSpec {
        match self {
            OptimizerKind::Adamomentum => KernelSpec::ADAMOMENTUM,
            OptimizerKind::Adam | OptimizerKind::Adamw => KernelSpec::ADAM,
            OptimizerKind::Rmsprop => KernelSpec::RMSPROP,
            OptimizerKind::Rprop => KernelSpec::RPROP,
            OptimizerKind::Adabelief => KernelSpec::ADABELIEF,
            OptimizerKind::Sgd => KernelSpec::SGD,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::Adamomentum => "adamomentum",
            OptimizerKind::Adam => "adam",
            OptimizerKind::Adamw => "adamw",
            OptimizerKind::Rmsprop => "rmsprop",
            OptimizerKind::Rprop => "rprop",
            OptimizerKind::Adabelief => "adabelief",
            OptimizerKind::Sgd => "sgd",
        }
    }

    pub const ALL: [OptimizerKind; 7] = [
        OptimizerKind::Adamomentum,
        OptimizerKind::Adam,
        OptimizerKind::Adamw,
        OptimizerKind::Rmsprop,
        OptimizerKind::Rprop,
        OptimizerKind::Adabelief,
        OptimizerKind::Sgd,
    ];
}

impl std::fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
