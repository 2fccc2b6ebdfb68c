//! Two-mode bosonic Fock space, oscillator moments and collective observables.

mod band;
mod moments;
mod observable;
mod space;

pub use band::BandMatrix;
pub use moments::{oscillator_moment, ratio_to_f64, Moment, MomentMatrix, MomentTable, DEFAULT_P_MAX};
pub use observable::{build_observable, CollectiveObservable, Surd};
pub use space::TwoModeSpace;
