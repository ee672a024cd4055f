use thiserror::Error;

/// Pipeline stage, used to tag errors raised inside a link simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Modulation,
    PulseShaping,
    TxChain,
    Array,
    Channel,
    RxChain,
    Demodulation,
    Calibration,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Stage::Modulation => "modulation",
            Stage::PulseShaping => "pulse-shaping",
            Stage::TxChain => "tx-chain",
            Stage::Array => "array",
            Stage::Channel => "channel",
            Stage::RxChain => "rx-chain",
            Stage::Demodulation => "demodulation",
            Stage::Calibration => "calibration",
        };
        f.write_str(name)
    }
}

/// Constraint that made a frequency plan infeasible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BindingConstraint {
    If1Bandwidth,
    Aliasing,
    Multiplier,
}

impl std::fmt::Display for BindingConstraint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            BindingConstraint::If1Bandwidth => "if1-bandwidth",
            BindingConstraint::Aliasing => "aliasing",
            BindingConstraint::Multiplier => "multiplier",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("signal is empty")]
    EmptySignal,

    #[error("signal has zero power")]
    ZeroPower,

    #[error("signal of {len} samples is shorter than fft size {fft_size}")]
    SignalTooShort { len: usize, fft_size: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("signals do not share sample rate and center frequency")]
    SignalMismatch,

    #[error("baseband occupies {occupied_hz:.4e} Hz but the IF plan allows {allowed_hz:.4e} Hz")]
    BandwidthExceeded { occupied_hz: f64, allowed_hz: f64 },

    #[error("no -3 dB crossing inside the angle grid")]
    NoHalfPowerCrossing,

    #[error("tones are {separation_bins:.2} bins apart; increase the fft size")]
    TonesUnresolved { separation_bins: f64 },

    #[error("frequency plan infeasible: binding constraint is {0}")]
    Infeasible(BindingConstraint),

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn at(stage: Stage) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage {
            stage,
            source: Box::new(source),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
