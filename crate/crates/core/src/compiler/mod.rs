//! Compilation of contracts to payoff expressions, and executable
//! correctness checks.

pub mod check;
pub mod compile;
pub mod gen;

pub use check::{
    check_commuting_diagram, check_commuting_diagram_many, check_compile_soundness,
    check_cut_payoff_n_step, check_totality, close, discounted_sum, run_cases, CaseReport,
    Comparison, Theorem,
};
pub use compile::{compile, from_contr, from_contr_calls, from_exp, tplus_smart, tplus_smart_z};
pub use gen::{gen_contract, gen_discount, gen_env, gen_tenv, GenConfig};
