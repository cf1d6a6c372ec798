import java.util.List;
import java.util.Optional;
import java.util.stream.Collectors;

class Streams {
    List<Integer> m(List<String> words) {
        long n = words.stream().filter(w -> w.length() > 2).count();
        Optional<String> first = words.stream().sorted().findFirst();
        boolean any = words.stream().anyMatch(w -> w.isEmpty());
        int total = words.stream().mapToInt(String::length).sum();
        List<Character> chars = words.stream().flatMap(w -> w.chars().mapToObj(c -> (char) c)).collect(Collectors.toList());
        first.ifPresent(s -> {});
        return words.stream().map(String::length).peek(x -> {}).collect(Collectors.toList());
    }
}
