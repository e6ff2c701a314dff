//! Interaction trees: potentially infinite trees of computation steps with
//! demand-driven node production.
//!
//! A tree node is `Ret` (terminate), `Tau` (silent step), or `Vis` (trigger
//! an event and continue with its answer). Nodes are produced lazily and
//! memoized, so observation is purely functional and combinators stay
//! productive: forcing one output node forces a bounded number of input
//! nodes.

use std::ops::ControlFlow;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;
use thiserror::Error;

use crate::lang::{Mem, Value};

/// The closed event alphabet.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Event {
    /// Runtime error. The answer domain is empty: the continuation of an
    /// `Err` node is never invoked.
    Err(String),
    /// Request for `n` uniformly sampled chunks, each below `2^chunk_bits`.
    Rnd(u64),
    /// Function call carrying the callee name, a memory snapshot, and the
    /// argument value. Answered with a final memory and a result value.
    Call { func: String, mem: Mem, arg: Value },
    /// Oracle query in security experiments. Answered with a value.
    Orac { oracle: String, arg: Value },
}

impl Event {
    pub fn is_err(&self) -> bool {
        matches!(self, Event::Err(_))
    }

    pub fn is_call(&self) -> bool {
        matches!(self, Event::Call { .. })
    }
}

/// Answers, one payload shape per event tag.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Answer {
    /// Answer to `Rnd(n)`: exactly `n` chunks.
    Chunks(Vec<u8>),
    /// Answer to `Call`: the callee's final memory and result value.
    Returned { mem: Mem, value: Value },
    /// Answer to `Orac`.
    Oracle(Value),
}

/// Result types storable in a tree.
pub trait Res: Clone + Send + Sync + 'static {}
impl<T: Clone + Send + Sync + 'static> Res for T {}

/// A continuation branching on the answer to an event.
pub type Kont<R> = Arc<dyn Fn(&Answer) -> ITree<R> + Send + Sync>;
/// A value continuation, as taken by `bind`.
pub type ValKont<A, B> = Arc<dyn Fn(&A) -> ITree<B> + Send + Sync>;

/// One forced node.
pub enum Node<R> {
    Ret(R),
    Tau(ITree<R>),
    Vis(Event, Kont<R>),
}

impl<R: Clone> Clone for Node<R> {
    fn clone(&self) -> Self {
        match self {
            Node::Ret(r) => Node::Ret(r.clone()),
            Node::Tau(t) => Node::Tau(t.clone()),
            Node::Vis(e, k) => Node::Vis(e.clone(), k.clone()),
        }
    }
}

type Producer<R> = Box<dyn FnOnce() -> Node<R> + Send>;

struct Inner<R> {
    node: OnceLock<Node<R>>,
    make: Mutex<Option<Producer<R>>>,
}

impl<R> Drop for Inner<R> {
    fn drop(&mut self) {
        // Forced loop spines are arbitrarily long Tau chains; unlink them
        // iteratively so dropping a tree never recurses unboundedly.
        let mut next = self.node.take();
        while let Some(node) = next {
            next = None;
            if let Node::Tau(t) = node {
                let ITree { inner } = t;
                if let Some(mut inner) = Arc::into_inner(inner) {
                    next = inner.node.take();
                }
            }
        }
    }
}

/// An interaction tree over the [`Event`] alphabet with results of type `R`.
///
/// Values are cheap to clone (shared pointer). Forced nodes are memoized
/// behind a lock, so trees can be shared across threads.
pub struct ITree<R> {
    inner: Arc<Inner<R>>,
}

impl<R> Clone for ITree<R> {
    fn clone(&self) -> Self {
        ITree { inner: self.inner.clone() }
    }
}

impl<R> std::fmt::Debug for ITree<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ITree(..)")
    }
}

impl<R> ITree<R> {
    /// Defers node production until first observation.
    pub fn defer(make: impl FnOnce() -> Node<R> + Send + 'static) -> ITree<R> {
        ITree {
            inner: Arc::new(Inner {
                node: OnceLock::new(),
                make: Mutex::new(Some(Box::new(make))),
            }),
        }
    }

    fn known(node: Node<R>) -> ITree<R> {
        let lock = OnceLock::new();
        let _ = lock.set(node);
        ITree { inner: Arc::new(Inner { node: lock, make: Mutex::new(None) }) }
    }

    pub fn ret(r: R) -> ITree<R> {
        ITree::known(Node::Ret(r))
    }

    pub fn tau(t: ITree<R>) -> ITree<R> {
        ITree::known(Node::Tau(t))
    }

    pub fn vis(e: Event, k: impl Fn(&Answer) -> ITree<R> + Send + Sync + 'static) -> ITree<R> {
        ITree::known(Node::Vis(e, Arc::new(k)))
    }

    /// An error leaf: a `Vis` node whose continuation is dead.
    pub fn err(msg: impl Into<String>) -> ITree<R> {
        ITree::known(Node::Vis(
            Event::Err(msg.into()),
            Arc::new(|_| unreachable!("answer supplied to an error event")),
        ))
    }

    /// Forces and returns this tree's node.
    pub fn node(&self) -> &Node<R> {
        self.inner.node.get_or_init(|| {
            let make = self
                .inner
                .make
                .lock()
                .unwrap()
                .take()
                .expect("itree node forced from its own producer");
            make()
        })
    }

    /// Stable identity of this node, used for cycle detection in checkers.
    pub fn id(&self) -> usize {
        Arc::as_ptr(&self.inner) as usize
    }
}

impl<R: Res> ITree<R> {
    /// Monadic bind: grafts `k(r)` at every `Ret(r)` leaf, preserving `Tau`
    /// and `Vis` nodes in order. Lazy in both arguments.
    pub fn bind<B: Res>(&self, k: impl Fn(&R) -> ITree<B> + Send + Sync + 'static) -> ITree<B> {
        bind_arc(self.clone(), Arc::new(k))
    }

    /// Ties a knot: `make` receives a handle to the tree being defined, so
    /// loops can share structure instead of unfolding fresh nodes. Checkers
    /// exploit the stable node identities for coinductive cycle closure.
    pub fn cyclic(make: impl FnOnce(ITree<R>) -> Node<R> + Send + 'static) -> ITree<R> {
        let inner = Arc::new_cyclic(|weak: &std::sync::Weak<Inner<R>>| {
            let weak = weak.clone();
            let producer: Producer<R> = Box::new(move || {
                let this = ITree { inner: weak.upgrade().expect("cyclic tree dropped while forcing") };
                make(this)
            });
            Inner { node: OnceLock::new(), make: Mutex::new(Some(producer)) }
        });
        ITree { inner }
    }

    /// Counts every node forced through the returned tree in `counter`.
    /// Observing the wrapper forces exactly one input node per output node.
    pub fn counted(&self, counter: &Arc<AtomicUsize>) -> ITree<R> {
        let t = self.clone();
        let counter = counter.clone();
        ITree::defer(move || {
            counter.fetch_add(1, Ordering::Relaxed);
            match t.node() {
                Node::Ret(r) => Node::Ret(r.clone()),
                Node::Tau(rest) => Node::Tau(rest.counted(&counter)),
                Node::Vis(e, k) => {
                    let k = k.clone();
                    Node::Vis(
                        e.clone(),
                        Arc::new(move |a| k(a).counted(&counter)),
                    )
                }
            }
        })
    }
}

fn bind_arc<A: Res, B: Res>(t: ITree<A>, k: ValKont<A, B>) -> ITree<B> {
    ITree::defer(move || match t.node() {
        Node::Ret(r) => k(r).node().clone(),
        Node::Tau(rest) => Node::Tau(bind_arc(rest.clone(), k)),
        Node::Vis(e, kont) => {
            let kont = kont.clone();
            Node::Vis(
                e.clone(),
                Arc::new(move |a| bind_arc(kont(a), k.clone())),
            )
        }
    })
}

/// Lifts an event into a tree that triggers it and returns the answer.
pub fn trigger(e: Event) -> ITree<Answer> {
    ITree::vis(e, |a| ITree::ret(a.clone()))
}

/// Iteration: runs `body` from `i0`, continuing (behind a guarding `Tau`) on
/// `Continue` and returning on `Break`. A body that always continues yields
/// an infinite `Tau`-interleaved tree.
pub fn iter<I: Res, A: Res>(
    body: impl Fn(&I) -> ITree<ControlFlow<A, I>> + Send + Sync + 'static,
    i0: I,
) -> ITree<A> {
    let body = Arc::new(body);
    iter_arc(body, i0)
}

type IterBody<I, A> = Arc<dyn Fn(&I) -> ITree<ControlFlow<A, I>> + Send + Sync>;

fn iter_arc<I: Res, A: Res>(body: IterBody<I, A>, i: I) -> ITree<A> {
    let step = body(&i);
    step.bind(move |out| match out {
        ControlFlow::Continue(next) => ITree::tau(iter_arc(body.clone(), next.clone())),
        ControlFlow::Break(a) => ITree::ret(a.clone()),
    })
}

/// An event handler mapping events to answer-producing trees.
pub type Handler = Arc<dyn Fn(&Event) -> ITree<Answer> + Send + Sync>;

/// A handler that re-triggers every event unchanged.
pub fn pass_through() -> Handler {
    Arc::new(|e| trigger(e.clone()))
}

/// Folds `h` over the tree: each `Vis(e, k)` becomes `Tau(bind(h(e), k))`.
/// Handlers for a subfamily of events re-trigger the rest.
pub fn interp<R: Res>(h: &Handler, t: &ITree<R>) -> ITree<R> {
    let h = h.clone();
    let t = t.clone();
    ITree::defer(move || match t.node() {
        Node::Ret(r) => Node::Ret(r.clone()),
        Node::Tau(rest) => Node::Tau(interp(&h, rest)),
        Node::Vis(e, k) => {
            let k = k.clone();
            let h2 = h.clone();
            let answered = h(e).bind(move |a| interp(&h2, &k(a)));
            Node::Tau(answered)
        }
    })
}

/// Recursive interpretation of `Call` events: the trees produced by `h` may
/// themselves trigger `Call`, which is handled again. All `Call` events are
/// consumed; other events remain as effects of the program.
pub fn interp_mrec<R: Res>(h: &Handler, t: &ITree<R>) -> ITree<R> {
    let h = h.clone();
    let t = t.clone();
    ITree::defer(move || match t.node() {
        Node::Ret(r) => Node::Ret(r.clone()),
        Node::Tau(rest) => Node::Tau(interp_mrec(&h, rest)),
        Node::Vis(e, k) if e.is_call() => {
            let k = k.clone();
            let inner = h(e).bind(move |a| k(a));
            Node::Tau(interp_mrec(&h, &inner))
        }
        Node::Vis(e, k) => {
            let k = k.clone();
            let h2 = h.clone();
            Node::Vis(e.clone(), Arc::new(move |a| interp_mrec(&h2, &k(a))))
        }
    })
}

/// One observed step of a bounded run.
#[derive(Clone, Debug, PartialEq)]
pub enum TraceStep<R> {
    Tau,
    Vis { event: Event, answer: Answer },
    Ret(R),
}

#[derive(Debug, Error)]
pub enum ObserveError<R> {
    #[error("error event after {} steps: {message}", .prefix.len())]
    ErrEncountered { message: String, prefix: Vec<TraceStep<R>> },
    #[error("fuel exhausted after {} steps", .prefix.len())]
    FuelExhausted { prefix: Vec<TraceStep<R>> },
}

/// Forces up to `fuel` nodes, answering events through `oracle`. The trace is
/// deterministic given the oracle.
pub fn observe<R: Res>(
    t: &ITree<R>,
    fuel: usize,
    mut oracle: impl FnMut(&Event) -> Answer,
) -> Result<Vec<TraceStep<R>>, ObserveError<R>> {
    let mut steps = Vec::new();
    let mut cur = t.clone();
    let mut fuel = fuel;
    loop {
        if fuel == 0 {
            return Err(ObserveError::FuelExhausted { prefix: steps });
        }
        fuel -= 1;
        let next = match cur.node() {
            Node::Ret(r) => {
                steps.push(TraceStep::Ret(r.clone()));
                return Ok(steps);
            }
            Node::Tau(rest) => {
                steps.push(TraceStep::Tau);
                rest.clone()
            }
            Node::Vis(Event::Err(msg), _) => {
                return Err(ObserveError::ErrEncountered { message: msg.clone(), prefix: steps });
            }
            Node::Vis(e, k) => {
                let answer = oracle(e);
                if let (Event::Rnd(n), Answer::Chunks(chunks)) = (e, &answer) {
                    debug_assert_eq!(chunks.len() as u64, *n, "oracle answered Rnd({n}) with {} chunks", chunks.len());
                }
                let rest = k(&answer);
                steps.push(TraceStep::Vis { event: e.clone(), answer });
                rest
            }
        };
        cur = next;
    }
}

/// A deterministic oracle deriving `Rnd` answers from a seed. Panics on
/// `Call` and `Orac` events, which interpreted program trees never contain.
pub fn seeded_oracle(seed: u64, chunk_bits: u32) -> impl FnMut(&Event) -> Answer {
    let mut state = seed.wrapping_add(0x9e3779b97f4a7c15);
    move |e| match e {
        Event::Rnd(n) => {
            let mut chunks = Vec::with_capacity(*n as usize);
            for _ in 0..*n {
                // splitmix64 step
                state = state.wrapping_add(0x9e3779b97f4a7c15);
                let mut z = state;
                z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
                z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
                z ^= z >> 31;
                chunks.push((z & ((1u64 << chunk_bits) - 1)) as u8);
            }
            Answer::Chunks(chunks)
        }
        other => panic!("seeded oracle cannot answer {other:?}"),
    }
}
