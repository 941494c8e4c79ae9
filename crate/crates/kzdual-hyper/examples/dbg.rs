fn main() {
    use kzdual_hyper::contour::*;
    use kzdual_core::linalg::c;
    let geo = LoopGeometry { center: [0.3, 0.1], dir: 0.0, h: 0.2, rho: 0.2, r_trunc: 30.0 };
    let path = tracked_loop(&geo, &QuadParams::default());
    println!("back nodes: {}, fwd nodes: {}", path.back.len(), path.fwd.len());
    let wind = |p| -> kzdual_core::linalg::C64 { path.back.iter().chain(&path.fwd).map(|n| n.w / (n.t - p)).sum() };
    println!("own: {}", wind(c(0.3,0.1)));
    println!("first back {:?} last back {:?}", path.back.first().map(|n| n.t), path.back.last().map(|n| n.t));
    println!("first fwd {:?} last fwd {:?}", path.fwd.first().map(|n| n.t), path.fwd.last().map(|n| n.t));
}
