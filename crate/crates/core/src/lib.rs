//! Exact replay of the level-13 converse theorem for weight-k modular forms,
//! together with a high-precision numeric harness that checks the same
//! congruences on concrete Fourier expansions.
//!
//! Layers, bottom up:
//!
//! * [`exactnum`]: `ℚ(√D)`, the scalar ring `ℚ(√D)[α₂, α₃, ε]/(ε²−1)` and
//!   rational functions over `ℚ(√D)`.
//! * [`projmat`]: projective 2×2 matrices with positive determinant.
//! * [`groupring`]: the group ring acting on forms by the weight-k stroke.
//! * [`text`]: the shared textual grammar.
//! * [`certificate`]: derivation certificates, their verifier and the
//!   level-13 derivation itself.
//! * [`gamma0`]: words in the Γ₀(13) generators.
//! * [`qseries`]: exact q-expansions and eta products.
//! * [`numeric`]: MPFR evaluation of forms and congruence residuals.

pub mod certificate;
pub mod exactnum;
pub mod gamma0;
pub mod groupring;
pub mod numeric;
pub mod projmat;
pub mod qseries;
pub mod text;
