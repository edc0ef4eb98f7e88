//! Job service for outsourced unit-commitment solves: an in-memory job
//! table with a bounded queue and worker pool ([`jobs`]) behind an
//! HTTP+JSON API ([`http`]). Jobs live in memory only and are lost on
//! restart.

pub mod http;
pub mod jobs;

pub use http::{router, serve};
pub use jobs::{JobInfo, JobService, JobSolver, JobStatus, MipJobSolver, ServiceConfig, ServiceError, SlowSolver};
