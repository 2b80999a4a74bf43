import java.util.concurrent.atomic.AtomicInteger;

/**
 * A thread-safe counter with a ceiling.
 */
public final class Counter {
    private final AtomicInteger value = new AtomicInteger();
    private final int max;

    public Counter(int max) {
        this.max = max;
    }

    /** Increments unless the ceiling is reached. */
    public boolean tryIncrement() {
        while (true) {
            int cur = value.get();
            if (cur >= max) {
                return false;
            }
            if (value.compareAndSet(cur, cur + 1)) {
                return true;
            }
        }
    }
}
