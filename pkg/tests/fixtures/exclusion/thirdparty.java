import org.thirdparty.concurrent.ConcurrentHashMap;

class Cache {
    ConcurrentHashMap<String, String> store = new ConcurrentHashMap<>();
}
