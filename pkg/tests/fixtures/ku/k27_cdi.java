import javax.enterprise.context.ApplicationScoped;
import javax.enterprise.event.Event;
import javax.enterprise.inject.Produces;
import javax.inject.Inject;

@ApplicationScoped
class Clock {
    @Inject
    Event<String> ticks;

    @Produces
    String now() {
        return "t";
    }
}
