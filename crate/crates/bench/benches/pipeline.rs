use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use umbilic_core::acceptance::{disc_surface, flec_hyperbonode_family};
use umbilic_core::invariants::{rho_ellipnode, rho_hyperbonode, rho_hyperbonode_diagonal};
use umbilic_core::nodes::{find_ellipnodes, find_hyperbonodes};
use umbilic_core::sweep::sweep;
use umbilic_core::tracing::{trace_flecnodal, trace_parabolic};
use umbilic_core::{MongeJet, PrenormalForm, Window};

fn invariants(c: &mut Criterion) {
    let h = PrenormalForm::new(1.0, 1.0, 2.0, 2.0).jet();
    let egg = MongeJet::from_terms(5, &[(2, 0, 0.5), (0, 2, 0.5), (3, 1, 1.0 / 6.0), (4, 0, 1.0 / 24.0), (0, 4, 1.0 / 24.0)])
        .unwrap();
    c.bench_function("partials", |b| b.iter(|| black_box(&h).partials(black_box(0.1), black_box(-0.2))));
    c.bench_function("rho_hyperbonode", |b| b.iter(|| rho_hyperbonode(black_box(&h), 0.0, 0.0)));
    c.bench_function("rho_hyperbonode_diagonal", |b| b.iter(|| rho_hyperbonode_diagonal(black_box(&h), 0.0, 0.0)));
    c.bench_function("rho_ellipnode", |b| b.iter(|| rho_ellipnode(black_box(&egg), 0.0, 0.0)));
}

fn tracing(c: &mut Criterion) {
    let disc = disc_surface();
    let w = Window::square(2.0);
    let mut g = c.benchmark_group("tracing");
    g.sample_size(10);
    g.bench_function("parabolic_disc_512", |b| b.iter(|| trace_parabolic(black_box(&disc), &w, 512)));
    g.bench_function("flecnodal_disc_128", |b| b.iter(|| trace_flecnodal(black_box(&disc), &w, 128)));
    g.bench_function("hyperbonodes_disc_256", |b| b.iter(|| find_hyperbonodes(black_box(&disc), &w, 256)));
    g.bench_function("ellipnodes_disc_256", |b| b.iter(|| find_ellipnodes(black_box(&disc), &w, 256)));
    g.finish();
}

fn sweeps(c: &mut Criterion) {
    let family = flec_hyperbonode_family();
    let w = Window::square(0.4);
    let mut g = c.benchmark_group("sweep");
    g.sample_size(10);
    g.bench_function("flec_family_64x10", |b| b.iter(|| sweep(black_box(&family), &w, 64, (-0.5, 0.5), 10)));
    g.finish();
}

criterion_group!(benches, invariants, tracing, sweeps);
criterion_main!(benches);
