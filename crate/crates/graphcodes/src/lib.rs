//! Quantum codes built from graphs: Floquet codes driven by perfect matchings
//! on trivalent graphs, toric codes on 2-complexes with twists, and the
//! statistical mechanics of decoding their check graphs with vacancies.

pub mod chainmap;
pub mod complex2;
pub mod decode;
pub mod effective;
pub mod experiments;
pub mod gf2;
pub mod ising;
pub mod matchcode;
pub mod pauli;
pub mod stab;
