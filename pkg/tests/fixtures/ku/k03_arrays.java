class Arrays1 {
    void m() {
        int[] xs = new int[3];
        xs[0] = 1;
        int[][] grid = new int[2][2];
        grid[1][1] = xs[0];
        String[] names = {"a", "b"};
    }
}
