use sepnmf::dense;
use sepnmf::pipeline;
use sepnmf::synth::{self, InteriorModel};

fn main() {
    let inst = synth::gen_instance(10, 30, 3, 1.0, InteriorModel::Dirichlet, 5).unwrap();
    inst.audit().unwrap();
    let factors = dense::svd(&inst.a_tilde).unwrap();
    let red = pipeline::reduce_from_factors(&factors, 3).unwrap();
    let truth = pipeline::reduced_truth(&inst, &factors).unwrap();
    println!("sigma_tail = {:.3e}", red.sigma_tail);
    println!("S max col norm = {:.3e}", (0..truth.s.cols()).map(|j| truth.s.column_norm(j)).fold(0.0f64, f64::max));
    let gram = &truth.g * &truth.g.transpose();
    let target = gram.try_inverse().unwrap();
    // feasibility of the closed form on every reduced column
    let mut worst = (0usize, 0.0f64);
    for j in 0..red.p.cols() {
        let p = red.p.column(j);
        let mut val = 0.0;
        for a in 0..3 { for b in 0..3 { val += p[a] * target.get(a, b) * p[b]; } }
        if val > worst.1 { worst = (j, val); }
    }
    println!("max p^T (GG^T)^-1 p = {:.6} at column {}", worst.1, worst.0);
    println!("true indices: {:?}", inst.true_indices);
    // column norms of K
    for i in 0..inst.k.cols() {
        let col = inst.k.column(i);
        let l1: f64 = col.iter().sum();
        let l2: f64 = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        if l1 > 1.0 || l2 > 1.0 {
            println!("k column {i}: l1 = {l1:.6} l2 = {l2:.6}");
        }
    }
    // check: is worst column a basis column?
    println!("worst column is basis? {}", inst.true_indices.contains(&worst.0));
    // sigma of G vs F
    let sf = dense::svd(&inst.f).unwrap();
    let sg = dense::svd(&truth.g).unwrap();
    println!("sigma(F) = {:?}", sf.sigma());
    println!("sigma(G) = {:?}", sg.sigma());
}
