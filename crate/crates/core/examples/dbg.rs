use properads::presets;
use properads::barkoszul::*;
use std::rc::Rc;
use std::time::Instant;
fn main() {
    let p = Rc::new(presets::get("epsbi").unwrap());
    let bar = Rc::new(BarCtx::new(p, 4, 12));
    for (d, m, n) in [(2usize, 2usize, 2usize), (3, 2, 3), (3, 1, 4)] {
        let t = Instant::now();
        let k = koszul_complex(&bar, d, m, n);
        let h = k.homology_dims();
        println!("K epsbi ({},{},{}): dims {:?} H {:?} [{:?}]", d, m, n, k.dims, h, t.elapsed());
    }
    let t = Instant::now();
    let c = cobar_slice(&bar, 4, 2, 4);
    println!("cobar (4,2,4): dims {:?} d2 {} [{:?}]", c.dims, c.d_squared_is_zero(), t.elapsed());
    let pa = Rc::new(presets::get("as").unwrap());
    let bara = Rc::new(BarCtx::new(pa, 3, 9));
    let t = Instant::now();
    let a = augmented_bar_slice(&bara, 3, 1, 3);
    println!("augbar as (3,1,3): dims {:?} H {:?} [{:?}]", a.dims, a.homology_dims(), t.elapsed());
}
