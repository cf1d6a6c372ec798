import javax.websocket.EncodeException;
import javax.websocket.Encoder;
import javax.websocket.EndpointConfig;
import javax.websocket.OnMessage;
import javax.websocket.OnOpen;
import javax.websocket.Session;
import javax.websocket.server.ServerEndpoint;

@ServerEndpoint("/chat")
class Chat {
    @OnOpen
    void open(Session s) {
    }
    @OnMessage
    String echo(String msg) {
        return msg;
    }
}

class TextEncoder implements Encoder.Text<String> {
    public String encode(String s) throws EncodeException {
        return s;
    }
    public void init(EndpointConfig c) {
    }
    public void destroy() {
    }
}
