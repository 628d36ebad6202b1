//! Randomized complete simplicial pairs for property suites.
//!
//! Fans are produced as random stellar subdivisions of fixed seed fans,
//! which preserves completeness and simpliciality by construction; ray
//! heights stay bounded by rejecting oversized subdivision vectors.

use super::{Fan, ToricPair};
use crate::linalg::{self, Rat};
use crate::Result;
use num_bigint::BigInt;
use num_traits::Signed;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const MAX_RAY_HEIGHT: i64 = 40;

pub fn seed_surfaces() -> Vec<Fan> {
    vec![
        // P^2
        Fan::new(
            2,
            vec![linalg::vec_i64(&[1, 0]), linalg::vec_i64(&[0, 1]), linalg::vec_i64(&[-1, -1])],
            vec![vec![0, 1], vec![1, 2], vec![0, 2]],
        )
        .unwrap(),
        // P^1 x P^1
        Fan::new(
            2,
            vec![
                linalg::vec_i64(&[1, 0]),
                linalg::vec_i64(&[0, 1]),
                linalg::vec_i64(&[-1, 0]),
                linalg::vec_i64(&[0, -1]),
            ],
            vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]],
        )
        .unwrap(),
        // F_2
        Fan::new(
            2,
            vec![
                linalg::vec_i64(&[1, 0]),
                linalg::vec_i64(&[0, 1]),
                linalg::vec_i64(&[-1, 2]),
                linalg::vec_i64(&[0, -1]),
            ],
            vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]],
        )
        .unwrap(),
    ]
}

pub fn seed_threefolds() -> Vec<Fan> {
    vec![
        // P^3
        Fan::new(
            3,
            vec![
                linalg::vec_i64(&[1, 0, 0]),
                linalg::vec_i64(&[0, 1, 0]),
                linalg::vec_i64(&[0, 0, 1]),
                linalg::vec_i64(&[-1, -1, -1]),
            ],
            vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]],
        )
        .unwrap(),
        // P^1 x P^1 x P^1
        Fan::new(
            3,
            vec![
                linalg::vec_i64(&[1, 0, 0]),
                linalg::vec_i64(&[-1, 0, 0]),
                linalg::vec_i64(&[0, 1, 0]),
                linalg::vec_i64(&[0, -1, 0]),
                linalg::vec_i64(&[0, 0, 1]),
                linalg::vec_i64(&[0, 0, -1]),
            ],
            vec![
                vec![0, 2, 4],
                vec![0, 2, 5],
                vec![0, 3, 4],
                vec![0, 3, 5],
                vec![1, 2, 4],
                vec![1, 2, 5],
                vec![1, 3, 4],
                vec![1, 3, 5],
            ],
        )
        .unwrap(),
        // P(1,1,1,2)
        Fan::new(
            3,
            vec![
                linalg::vec_i64(&[1, 0, 0]),
                linalg::vec_i64(&[0, 1, 0]),
                linalg::vec_i64(&[0, 0, 1]),
                linalg::vec_i64(&[-1, -1, -2]),
            ],
            vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]],
        )
        .unwrap(),
    ]
}

/// One stellar subdivision at a random interior vector of a random maximal
/// cone.  Returns `None` when no admissible subdivision vector is found
/// within the ray height bound.
pub fn stellar_subdivide(fan: &Fan, rng: &mut ChaCha8Rng) -> Option<Fan> {
    let n = fan.dim();
    for _ in 0..24 {
        let cone_idx = rng.gen_range(0..fan.max_cones().len());
        let cone = &fan.max_cones()[cone_idx];
        let weights: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=3)).collect();
        let mut v = linalg::zeros(n);
        for (k, &i) in cone.iter().enumerate() {
            v = linalg::add_scaled(&v, &linalg::rat(weights[k]), &fan.rays()[i]);
        }
        let v = linalg::primitive(&v);
        let height_ok = v.iter().all(|x| {
            let a: &BigInt = x.numer();
            a.abs() <= BigInt::from(MAX_RAY_HEIGHT)
        });
        if !height_ok || fan.ray_index(&v).is_some() {
            continue;
        }
        let mut rays = fan.rays().to_vec();
        rays.push(v);
        let new_ray = rays.len() - 1;
        let mut cones: Vec<Vec<usize>> = fan
            .max_cones()
            .iter()
            .enumerate()
            .filter(|&(ci, _)| ci != cone_idx)
            .map(|(_, c)| c.clone())
            .collect();
        for drop in 0..n {
            let mut c: Vec<usize> = cone
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != drop)
                .map(|(_, &i)| i)
                .collect();
            c.push(new_ray);
            cones.push(c);
        }
        if let Ok(new_fan) = Fan::new(n, rays, cones) {
            return Some(new_fan);
        }
    }
    None
}

/// Random complete simplicial pair: a seed fan subdivided up to the target
/// Picard number, with random rational boundary coefficients in [0, 9/10].
pub fn random_pair(dim: usize, max_rho: usize, rng: &mut ChaCha8Rng) -> Result<ToricPair> {
    let seeds = match dim {
        2 => seed_surfaces(),
        3 => seed_threefolds(),
        _ => return Err(crate::Error::Config(format!("no seed fans in dimension {dim}"))),
    };
    let mut fan = seeds[rng.gen_range(0..seeds.len())].clone();
    let target_rho = rng.gen_range(fan.rays().len() - dim..=max_rho.max(fan.rays().len() - dim));
    while fan.rays().len() - dim < target_rho {
        match stellar_subdivide(&fan, rng) {
            Some(next) => fan = next,
            None => break,
        }
    }
    let delta: Vec<Rat> = (0..fan.rays().len())
        .map(|_| linalg::ratio(rng.gen_range(0..=9), 10))
        .collect();
    ToricPair::new(fan, delta)
}
