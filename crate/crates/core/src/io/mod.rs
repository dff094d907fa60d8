pub mod pgm;
pub mod trace;

pub use pgm::{decode_pgm, encode_pgm, read_pgm, write_pgm, PgmFormat};
pub use trace::{trace_to_csv, TRACE_HEADER};
