//! Fixed enumeration of the claims a report row can support.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Claim {
    /// The kernels solve the steady and mode-`k` Oseen systems.
    KernelSystem,
    /// The mode kernels match the inverted discrete symbol.
    ModeKernelSymbol,
    /// Convolutions of the kernels obey the anisotropic bounds.
    ConvolutionBound,
    /// The linear representation formulas reproduce exact solutions.
    LinearRepresentation,
    /// Purely periodic velocity decays like `|x|^{-2}` with time-dependent
    /// flux and like `|x|^{-3}` with constant flux.
    PeriodicVelocityDecay,
    /// Purely periodic pressure decays like `|x|^{-1}` or `|x|^{-2}`.
    PeriodicPressureDecay,
    /// Steady velocity decays like `[|x|(1+𝓈)]^{-1}`.
    SteadyVelocityDecay,
    /// The velocity remainder after the leading expansion decays like
    /// `|x|^{-4}` (periodic) and `[|x|(1+𝓈)]^{-3/2}` (steady).
    VelocityRemainder,
    /// The pressure remainder after the leading expansion.
    PressureRemainder,
}

impl Claim {
    pub fn for_field(field: &str) -> Option<Self> {
        Some(match field {
            "v_perp" => Self::PeriodicVelocityDecay,
            "p_perp" => Self::PeriodicPressureDecay,
            "v_steady" => Self::SteadyVelocityDecay,
            "rem_v_perp" | "rem_v_steady" => Self::VelocityRemainder,
            "rem_p_perp" => Self::PressureRemainder,
            _ => return None,
        })
    }

    pub fn for_check(check: &str) -> Option<Self> {
        Some(match check {
            "residual" => Self::KernelSystem,
            "fft" => Self::ModeKernelSymbol,
            "conv" => Self::ConvolutionBound,
            _ => return None,
        })
    }

    pub fn tag(self) -> &'static str {
        match self {
            Self::KernelSystem => "kernel_system",
            Self::ModeKernelSymbol => "mode_kernel_symbol",
            Self::ConvolutionBound => "convolution_bound",
            Self::LinearRepresentation => "linear_representation",
            Self::PeriodicVelocityDecay => "periodic_velocity_decay",
            Self::PeriodicPressureDecay => "periodic_pressure_decay",
            Self::SteadyVelocityDecay => "steady_velocity_decay",
            Self::VelocityRemainder => "velocity_remainder",
            Self::PressureRemainder => "pressure_remainder",
        }
    }
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}
