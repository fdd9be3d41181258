//! Configuration, deterministic sweeps, result files and the `verify`
//! property run behind the `entsus` command line.

mod config;
mod corpus;
mod output;
mod sweep;
mod verify;

pub use config::{
    BosonFamily, Family, FermionFamily, Overrides, Quantity, SpinFamily, SweepPlan, MAX_BOSON_MODES,
    MAX_FERMION_MODES, MAX_SPIN_SITES,
};
pub use corpus::{
    gapped_amplitudes, random_boson_instance, random_fermion_instance, random_spin_corpus, CorpusEntry, GAP_FLOOR,
};
pub use output::{read_rows, write_rows, write_two_column, Format, Header, ResultRow, CODE_VERSION};
pub use sweep::{run_sweep, RunOptions};
pub use verify::{verify, verify_with_corpus, HistogramBin, InvariantCheck, VerifyOptions, VerifyReport};
