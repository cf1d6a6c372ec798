import javax.ws.rs.GET;
import javax.ws.rs.Path;
import javax.ws.rs.Produces;
import javax.ws.rs.core.Response;

@Path("/items")
class ItemResource {
    @GET
    @Produces("application/json")
    Response list() {
        return Response.ok().build();
    }
}
