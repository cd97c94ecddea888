//! Seeded elitist non-dominated-sorting evolutionary search over the
//! joint space. The genome is one index per tunable dimension; constraint
//! domination lets infeasible points compete by violation magnitude while
//! never displacing feasible ones.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use crate::error::{Error, Result};

use super::{
    constrained_dominates, evaluate_candidate, Candidate, EvalContext, JointSpace, Provenance,
    RunRecord, SearchStrategy,
};

/// Evolutionary strategy knobs. All runs with the same knobs, seed, and
/// context are bit-reproducible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nsga2Config {
    /// Even population size; a generation costs this many evaluations.
    pub population: usize,
    /// Probability a parent pair recombines (uniform per-gene swap).
    pub crossover_prob: f64,
    /// Per-gene mutation probability; defaults to 1/genome_length.
    pub mutation_prob: Option<f64>,
}

impl Default for Nsga2Config {
    fn default() -> Self {
        Self {
            population: 32,
            crossover_prob: 0.9,
            mutation_prob: None,
        }
    }
}

/// The evolutionary strategy behind the [`SearchStrategy`] interface.
#[derive(Debug, Clone, Copy, Default)]
pub struct Nsga2Search {
    pub config: Nsga2Config,
}

struct Individual {
    genome: Vec<usize>,
    candidate: Candidate,
    rank: usize,
    crowding: f64,
}

fn random_genome(card: &[usize], rng: &mut StdRng) -> Vec<usize> {
    card.iter().map(|&c| rng.gen_range(0..c)).collect()
}

/// Ranks by constraint-domination; returns fronts of indices.
fn non_dominated_sort(pop: &[Individual]) -> Vec<Vec<usize>> {
    let n = pop.len();
    let mut dominated_by = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if i != j && constrained_dominates(&pop[i].candidate, &pop[j].candidate) {
                dominates_list[i].push(j);
            }
        }
    }
    for list in &dominates_list {
        for &j in list {
            dominated_by[j] += 1;
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominates_list[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::take(&mut current));
        current = next;
    }
    fronts
}

/// Crowding distance over a front. Feasible members spread over their
/// objective vectors, infeasible ones over violation magnitude.
#[allow(clippy::needless_range_loop)]
fn crowding_distances(pop: &[Individual], front: &[usize]) -> Vec<f64> {
    let keys: Vec<Vec<f64>> = front
        .iter()
        .map(|&i| {
            let c = &pop[i].candidate;
            if c.feasible {
                c.objectives().unwrap_or_default()
            } else {
                vec![c.violation_magnitude()]
            }
        })
        .collect();
    let n = front.len();
    let mut dist = vec![0.0f64; n];
    if n < 3 {
        return vec![f64::INFINITY; n];
    }
    let dims = keys.iter().map(|k| k.len()).min().unwrap_or(0);
    for d in 0..dims {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| keys[a][d].total_cmp(&keys[b][d]));
        let lo = keys[order[0]][d];
        let hi = keys[order[n - 1]][d];
        let range = hi - lo;
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        if range <= f64::EPSILON {
            continue;
        }
        for w in 1..n - 1 {
            let spread = (keys[order[w + 1]][d] - keys[order[w - 1]][d]) / range;
            dist[order[w]] += spread;
        }
    }
    dist
}

/// Lower rank wins; equal rank prefers the larger crowding distance;
/// exact ties keep the first index (deterministic).
fn tournament(pop: &[Individual], rng: &mut StdRng) -> usize {
    let a = rng.gen_range(0..pop.len());
    let b = rng.gen_range(0..pop.len());
    if pop[b].rank < pop[a].rank
        || (pop[b].rank == pop[a].rank && pop[b].crowding > pop[a].crowding)
    {
        b
    } else {
        a
    }
}

fn assign_ranks(pop: &mut [Individual]) {
    let fronts = non_dominated_sort(pop);
    for (rank, front) in fronts.iter().enumerate() {
        let dist = crowding_distances(pop, front);
        for (&i, &d) in front.iter().zip(&dist) {
            pop[i].rank = rank;
            pop[i].crowding = d;
        }
    }
}

impl SearchStrategy for Nsga2Search {
    fn name(&self) -> &'static str {
        "nsga2"
    }

    fn run(
        &self,
        space: &JointSpace,
        ctx: &EvalContext,
        budget: usize,
        seed: u64,
    ) -> Result<RunRecord> {
        let cfg = self.config;
        if cfg.population < 4 || !cfg.population.is_multiple_of(2) {
            return Err(Error::Config("population must be even and >= 4".into()));
        }
        if budget < cfg.population {
            return Err(Error::BudgetTooSmall {
                budget,
                population: cfg.population,
            });
        }
        let card = space.gene_cardinalities();
        let mutation_prob = cfg.mutation_prob.unwrap_or(1.0 / card.len() as f64);
        let generations = budget / cfg.population;
        let mut rng = StdRng::seed_from_u64(seed);
        let mut log: Vec<Candidate> = Vec::with_capacity(generations * cfg.population);

        // Evaluation batches run in parallel but land in submission order,
        // so parallelism never changes the outcome.
        let evaluate_batch = |genomes: &[Vec<usize>], log: &mut Vec<Candidate>| -> Vec<Candidate> {
            let first_trial = log.len();
            let batch: Vec<Candidate> = genomes
                .par_iter()
                .enumerate()
                .map(|(i, genome)| {
                    let (model, hw) = space.decode(genome);
                    evaluate_candidate(
                        &model,
                        &hw,
                        ctx,
                        Provenance {
                            trial: first_trial + i,
                            seed,
                            strategy: "nsga2".into(),
                        },
                    )
                })
                .collect();
            log.extend(batch.iter().cloned());
            batch
        };

        let genomes: Vec<Vec<usize>> = (0..cfg.population)
            .map(|_| random_genome(&card, &mut rng))
            .collect();
        let batch = evaluate_batch(&genomes, &mut log);
        let mut population: Vec<Individual> = genomes
            .into_iter()
            .zip(batch)
            .map(|(genome, candidate)| Individual {
                genome,
                candidate,
                rank: 0,
                crowding: 0.0,
            })
            .collect();
        assign_ranks(&mut population);

        for _gen in 1..generations {
            let mut child_genomes = Vec::with_capacity(cfg.population);
            for _ in 0..cfg.population / 2 {
                let p1 = tournament(&population, &mut rng);
                let p2 = tournament(&population, &mut rng);
                let mut c1 = population[p1].genome.clone();
                let mut c2 = population[p2].genome.clone();
                if rng.gen_bool(cfg.crossover_prob) {
                    for g in 0..card.len() {
                        if rng.gen_bool(0.5) {
                            std::mem::swap(&mut c1[g], &mut c2[g]);
                        }
                    }
                }
                for child in [&mut c1, &mut c2] {
                    for (g, &c) in card.iter().enumerate() {
                        if rng.gen_bool(mutation_prob) {
                            child[g] = rng.gen_range(0..c);
                        }
                    }
                }
                child_genomes.push(c1);
                child_genomes.push(c2);
            }
            let batch = evaluate_batch(&child_genomes, &mut log);
            population.extend(
                child_genomes
                    .into_iter()
                    .zip(batch)
                    .map(|(genome, candidate)| Individual {
                        genome,
                        candidate,
                        rank: 0,
                        crowding: 0.0,
                    }),
            );

            // Elitist survival: whole fronts while they fit, then the
            // best-spread members of the front that overflows.
            assign_ranks(&mut population);
            let fronts = non_dominated_sort(&population);
            let mut keep: Vec<usize> = Vec::with_capacity(cfg.population);
            for front in fronts {
                if keep.len() + front.len() <= cfg.population {
                    keep.extend(front);
                } else {
                    let mut by_crowding = front;
                    by_crowding.sort_by(|&a, &b| {
                        population[b]
                            .crowding
                            .total_cmp(&population[a].crowding)
                            .then(a.cmp(&b))
                    });
                    by_crowding.truncate(cfg.population - keep.len());
                    keep.extend(by_crowding);
                    break;
                }
            }
            keep.sort_unstable();
            let mut survivors = Vec::with_capacity(cfg.population);
            for i in keep.into_iter().rev() {
                survivors.push(population.swap_remove(i));
            }
            survivors.reverse();
            population = survivors;
            assign_ranks(&mut population);
        }

        RunRecord::finalize("nsga2", seed, ctx.mode, budget, log)
    }
}

/// Run the evolutionary search with default knobs.
pub fn nsga2_search(
    space: &JointSpace,
    ctx: &EvalContext,
    budget: usize,
    seed: u64,
) -> Result<RunRecord> {
    Nsga2Search::default().run(space, ctx, budget, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimize::{dominates, exhaustive_search, ModeKind};
    use crate::presets;

    #[test]
    fn same_seed_reproduces_the_record_exactly() {
        let ctx = presets::desk_context(ModeKind::Carbon);
        let space = presets::desk_space();
        let a = nsga2_search(&space, &ctx, 128, 7).unwrap();
        let b = nsga2_search(&space, &ctx, 128, 7).unwrap();
        assert_eq!(a, b);
        let different = nsga2_search(&space, &ctx, 128, 8).unwrap();
        assert_ne!(
            serde_json::to_string(&a.candidates).unwrap(),
            serde_json::to_string(&different.candidates).unwrap()
        );
    }

    #[test]
    fn budget_below_population_is_rejected() {
        let ctx = presets::desk_context(ModeKind::Carbon);
        let space = presets::desk_space();
        assert!(matches!(
            nsga2_search(&space, &ctx, 8, 7),
            Err(Error::BudgetTooSmall { .. })
        ));
    }

    #[test]
    fn evaluation_count_is_generations_times_population() {
        let ctx = presets::desk_context(ModeKind::Carbon);
        let space = presets::desk_space();
        let record = nsga2_search(&space, &ctx, 100, 7).unwrap();
        // 100 / 32 = 3 generations of 32.
        assert_eq!(record.evaluations, 96);
    }

    #[test]
    fn oracle_front_dominates_or_equals_every_member() {
        let ctx = presets::desk_context(ModeKind::Carbon);
        let space = presets::desk_space();
        let oracle = exhaustive_search(&space, &ctx, 0).unwrap();
        let run = nsga2_search(&space, &ctx, 256, 13).unwrap();
        for m in &run.front.members {
            let covered =
                oracle.front.members.iter().any(|o| {
                    dominates(o, m, &ctx.mode).unwrap() || o.objectives() == m.objectives()
                });
            assert!(covered, "member {:?} not covered", m.objectives());
        }
    }

    #[test]
    fn every_emitted_model_validates_against_its_prune_space() {
        let ctx = presets::desk_context(ModeKind::Carbon);
        let space = presets::desk_space();
        let record = nsga2_search(&space, &ctx, 256, 21).unwrap();
        for c in &record.candidates {
            assert!(crate::workload::validate_model_config(&c.model, &space.prune).is_empty());
        }
    }

    #[test]
    fn no_feasible_region_yields_empty_front_with_diagnostics() {
        // A 0.1 ms cap nothing in the desk space can meet.
        let mut ctx = presets::desk_context(ModeKind::Carbon);
        ctx.mode =
            crate::optimize::ObjectiveMode::with_latency_cap(ModeKind::Carbon, 1e-7).unwrap();
        let space = presets::desk_space();
        let record = nsga2_search(&space, &ctx, 64, 3).unwrap();
        assert!(record.front.is_empty());
        assert!(record.hypervolume.is_none());
        assert!(record.candidates.iter().all(|c| !c.feasible));
        assert!(record.candidates.iter().all(|c| !c.violations.is_empty()));
    }
}
