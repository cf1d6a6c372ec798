import java.time.*;
import java.time.format.DateTimeFormatter;
import java.time.temporal.ChronoUnit;

class Dates {
    void m() {
        LocalDate d = LocalDate.now();
        LocalDateTime t = d.atStartOfDay().plusHours(2);
        Duration span = Duration.ofMinutes(5);
        DateTimeFormatter fmt = DateTimeFormatter.ofPattern("yyyy");
        ZoneId zone = ZoneId.of("UTC");
        long days = ChronoUnit.DAYS.between(d, d);
    }
}
