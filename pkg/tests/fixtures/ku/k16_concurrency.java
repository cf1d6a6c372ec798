import java.util.concurrent.*;
import java.util.concurrent.atomic.AtomicInteger;

class Workers {
    private final AtomicInteger hits = new AtomicInteger();
    synchronized void bump() {
        hits.incrementAndGet();
    }
    void run() throws Exception {
        ExecutorService pool = Executors.newFixedThreadPool(2);
        Callable<Integer> task = () -> 1;
        Future<Integer> f = pool.submit(task);
        CopyOnWriteArrayList<Integer> list = new CopyOnWriteArrayList<>();
        CyclicBarrier barrier = new CyclicBarrier(2);
        ForkJoinPool fj = new ForkJoinPool();
        synchronized (this) {
            list.add(f.get());
        }
    }
}
