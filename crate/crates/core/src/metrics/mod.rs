//! Fisher information, CRB, rates and cost.

pub mod comm;
pub mod fim;
pub mod oracle;
pub mod pulse;
pub mod quadrature;

pub use comm::{cooperation_cost, group_cost, interference_cov, rate, rates};
pub use fim::{crb, crb_from_upsilon, upsilon, upsilon_all, CrbReport, FimConstants};
pub use oracle::{numerical_fim_oracle, OracleOptions};
pub use pulse::{pulse_integrals, PulseIntegrals, PulseShape};
